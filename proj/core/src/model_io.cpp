#include "ride/model_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "ride/errors.hpp"

namespace ride {
namespace {

constexpr char kMagic[8] = {'R', 'I', 'D', 'E', 'M', 'O', 'D', 'L'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    for (double v : vs) f64(v);
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > in_.size()) {
      throw FormatError("model file truncated reading " + std::string(what) + " at byte offset " +
                        std::to_string(pos_));
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * k);
    return v;
  }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * k);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  void f64s(std::span<double> out, const char* what) {
    need(out.size() * 8, what);
    for (auto& v : out) v = f64(what);
  }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_model(const RideModel& model) {
  model.validate();
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.slstm.hidden()));
  w.u32(static_cast<std::uint32_t>(model.slstm.inputs()));
  w.u32(static_cast<std::uint32_t>(model.mcgsm.components()));
  w.u32(static_cast<std::uint32_t>(model.mcgsm.scales()));
  w.u32(static_cast<std::uint32_t>(model.mcgsm.rank()));
  for (const auto& [di, dj] : model.window.offsets) {
    w.i32(di);
    w.i32(dj);
  }
  w.f64(model.preprocessing.low);
  w.f64(model.preprocessing.high);
  w.f64(model.preprocessing.offset);
  w.u8(model.preprocessing.dequantize ? 1 : 0);
  w.u64(model.slstm.values().size());
  w.u64(model.mcgsm.values().size());
  w.f64s(model.slstm.values());
  w.f64s(model.mcgsm.values());
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

RideModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a RIDE model file (bad magic bytes)");
  }
  Reader r(bytes.subspan(sizeof(kMagic)));
  const std::uint32_t version = r.u32("version");
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version) + " (this build reads " +
                       std::to_string(kModelFormatVersion) + ")");
  }
  const auto hidden = static_cast<int>(r.u32("hidden"));
  const auto inputs = static_cast<int>(r.u32("inputs"));
  const auto components = static_cast<int>(r.u32("components"));
  const auto scales = static_cast<int>(r.u32("scales"));
  const auto rank = static_cast<int>(r.u32("rank"));
  if (hidden < 1 || inputs < 1 || components < 1 || scales < 1 || rank < 1 || hidden > (1 << 16) ||
      inputs > (1 << 16) || components > (1 << 16) || scales > (1 << 16) || rank > (1 << 16)) {
    throw FormatError("model header has invalid dimensions");
  }

  RideModel m;
  m.window.offsets.clear();
  for (int k = 0; k < inputs; ++k) {
    const int di = r.i32("window");
    const int dj = r.i32("window");
    m.window.offsets.emplace_back(di, dj);
  }
  m.preprocessing.low = r.f64("preprocessing");
  m.preprocessing.high = r.f64("preprocessing");
  m.preprocessing.offset = r.f64("preprocessing");
  m.preprocessing.dequantize = r.u8("preprocessing") != 0;

  m.slstm = SlstmParams(hidden, inputs);
  m.mcgsm = McgsmParams(components, scales, hidden, rank);
  const std::uint64_t n_slstm = r.u64("block sizes");
  const std::uint64_t n_mcgsm = r.u64("block sizes");
  if (n_slstm != m.slstm.values().size() || n_mcgsm != m.mcgsm.values().size()) {
    throw FormatError("model parameter block sizes disagree with header dimensions");
  }
  r.f64s(m.slstm.values(), "slstm parameters");
  r.f64s(m.mcgsm.values(), "mcgsm parameters");

  const std::size_t body = sizeof(kMagic) + r.position();
  const std::uint32_t stored = r.u32("checksum");
  const std::uint32_t actual = crc32_of(bytes.subspan(0, body));
  if (stored != actual) throw FormatError("model checksum mismatch");
  if (sizeof(kMagic) + r.position() != bytes.size()) throw FormatError("trailing bytes after model checksum");
  m.validate();
  return m;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_model(const RideModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

RideModel load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

}  // namespace ride
