#include "ride/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "ride/errors.hpp"
#include "ride/model_io.hpp"

namespace ride {
namespace {

class HeaderParser {
 public:
  explicit HeaderParser(std::span<const std::uint8_t> in) : in_(in) {}

  void skip_space_and_comments() {
    while (pos_ < in_.size()) {
      if (in_[pos_] == '#') {
        while (pos_ < in_.size() && in_[pos_] != '\n') ++pos_;
      } else if (std::isspace(in_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= in_.size()) throw FormatError("PGM truncated reading " + std::string(what) + " at byte offset " + std::to_string(pos_));
    if (!std::isdigit(in_[pos_])) {
      throw FormatError("PGM malformed " + std::string(what) + " at byte offset " + std::to_string(pos_));
    }
    long v = 0;
    while (pos_ < in_.size() && std::isdigit(in_[pos_])) {
      v = v * 10 + (in_[pos_] - '0');
      if (v > (1L << 30)) throw FormatError("PGM " + std::string(what) + " too large at byte offset " + std::to_string(pos_));
      ++pos_;
    }
    return v;
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  void single_whitespace() {
    if (pos_ >= in_.size()) throw FormatError("PGM truncated header at byte offset " + std::to_string(pos_));
    if (!std::isspace(in_[pos_])) throw FormatError("PGM malformed header at byte offset " + std::to_string(pos_));
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

Grid2D decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM (expected P5 magic at byte offset 0)");
  }
  HeaderParser p(bytes.subspan(2));
  const long width = p.number("width");
  const long height = p.number("height");
  const long maxval = p.number("maxval");
  p.single_whitespace();
  if (width < 1 || height < 1) throw FormatError("PGM has zero width or height");
  if (maxval < 1 || maxval > 65535) throw FormatError("PGM maxval " + std::to_string(maxval) + " out of range");

  const std::size_t offset = 2 + p.position();
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + n * bpp) {
    throw FormatError("PGM payload truncated at byte offset " + std::to_string(bytes.size()) + " (expected " +
                      std::to_string(offset + n * bpp) + " bytes)");
  }
  Grid2D out(static_cast<int>(height), static_cast<int>(width));
  const double denom = static_cast<double>(maxval);
  for (std::size_t k = 0; k < n; ++k) {
    unsigned v = bpp == 1 ? bytes[offset + k] : (unsigned{bytes[offset + 2 * k]} << 8) | bytes[offset + 2 * k + 1];
    if (v > static_cast<unsigned>(maxval)) {
      throw FormatError("PGM sample exceeds maxval at byte offset " + std::to_string(offset + k * bpp));
    }
    out[k] = v / denom;
  }
  return out;
}

Grid2D read_image(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::uint8_t quantize8(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot quantize a non-finite pixel");
  return static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 1.0) * 255.0));
}

std::vector<std::uint8_t> encode_pgm(const Grid2D& image) {
  if (image.empty()) throw std::invalid_argument("cannot write an empty image");
  const std::string header = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + image.size());
  for (double v : image.values()) out.push_back(quantize8(v));
  return out;
}

void write_image(const Grid2D& image, const std::filesystem::path& path) { write_file_atomic(path, encode_pgm(image)); }

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ride
