#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ride/model.hpp"

namespace ride {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary model encoding, see docs/MODEL_FORMAT.md. Little-endian throughout,
/// CRC-32 trailer over every preceding byte.
std::vector<std::uint8_t> encode_model(const RideModel& model);
/// Throws FormatError (bad magic, truncation, checksum) or VersionError.
RideModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const RideModel& model, const std::filesystem::path& path);
RideModel load_model(const std::filesystem::path& path);

/// CRC-32 (zlib polynomial) of a byte range, used for checksums and run manifests.
std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ride
