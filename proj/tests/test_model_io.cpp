#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "ride/errors.hpp"
#include "ride/model_io.hpp"

namespace ride {
namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ride_model_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

RideModel sample_model() {
  RideConfig cfg;
  cfg.hidden = 5;
  cfg.components = 3;
  cfg.scales = 2;
  cfg.rank = 2;
  cfg.window = CausalWindow{{{-1, 0}, {0, -1}, {-2, 2}}};
  SeededRng rng(3);
  return RideModel::create(cfg, rng);
}

TEST(ModelIo, RoundTripIsBitExact) {
  const RideModel m = sample_model();
  const auto path = temp_path("roundtrip.ride");
  save_model(m, path);
  const RideModel back = load_model(path);
  EXPECT_EQ(back, m);
  SeededRng rng(4);
  const Grid2D x = testing::random_image(6, 6, rng);
  EXPECT_EQ(log_likelihood(back, x).total, log_likelihood(m, x).total);
  EXPECT_EQ(encode_model(back), encode_model(m));
}

TEST(ModelIo, BadMagicIsFormatError) {
  auto bytes = encode_model(sample_model());
  bytes[0] = 'X';
  EXPECT_THROW(decode_model(bytes), FormatError);
}

TEST(ModelIo, FutureVersionIsVersionError) {
  auto bytes = encode_model(sample_model());
  bytes[8] = 2;
  try {
    decode_model(bytes);
    FAIL() << "expected VersionError";
  } catch (const VersionError& e) {
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
  }
}

TEST(ModelIo, TruncationNamesOffset) {
  const auto bytes = encode_model(sample_model());
  for (std::size_t cut : {std::size_t{10}, std::size_t{40}, bytes.size() / 2, bytes.size() - 1}) {
    try {
      decode_model(std::span(bytes).first(cut));
      FAIL() << "expected FormatError at cut " << cut;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
    }
  }
}

TEST(ModelIo, FlippedPayloadBitFailsChecksum) {
  auto bytes = encode_model(sample_model());
  bytes[bytes.size() - 20] ^= 0x10;
  EXPECT_THROW(decode_model(bytes), FormatError);
}

TEST(ModelIo, TrailingBytesRejected) {
  auto bytes = encode_model(sample_model());
  bytes.push_back(0);
  EXPECT_THROW(decode_model(bytes), FormatError);
}

TEST(ModelIo, Crc32KnownValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32_of(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())), 0xCBF43926u);
}

TEST(ModelIo, AtomicWriteLeavesNoTemporary) {
  const auto path = temp_path("atomic.bin");
  const std::vector<std::uint8_t> data = {1, 2, 3};
  write_file_atomic(path, data);
  EXPECT_EQ(read_file_bytes(path), data);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

}  // namespace
}  // namespace ride
