#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ride/grid.hpp"

namespace ride {

/// Binary PGM (P5). 8- and 16-bit inputs are rescaled by 1/maxval; header
/// comments are accepted. Errors are FormatError and name the byte offset.
Grid2D decode_pgm(std::span<const std::uint8_t> bytes);
Grid2D read_image(const std::filesystem::path& path);

/// 8-bit P5 with maxval 255. Values are clamped to [0,1] and rounded.
std::vector<std::uint8_t> encode_pgm(const Grid2D& image);
void write_image(const Grid2D& image, const std::filesystem::path& path);

/// Round-to-nearest 8-bit code of a [0,1] value, clamped.
std::uint8_t quantize8(double value);

/// Every *.pgm file under `dir` (non-recursive), sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace ride
