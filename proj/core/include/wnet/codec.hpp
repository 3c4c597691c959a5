#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wnet/image.hpp"

namespace wnet {

using Bytes = std::vector<std::uint8_t>;

// Tiles travel as binary PPM (P6, maxval 255). Masks travel as binary PGM
// (P5): binary masks with maxval 255 and {0,255} samples, density masks with
// maxval 65535 and big-endian samples round(M * 65535).

Bytes encode_tile(const ImageTile& tile);
ImageTile decode_tile(std::span<const std::uint8_t> bytes, std::string id = {});

Bytes encode_binary(const BinaryMask& mask);
BinaryMask decode_binary(std::span<const std::uint8_t> bytes, std::string image_id = {});

Bytes encode_density(const DensityMask& mask);
DensityMask decode_density(std::span<const std::uint8_t> bytes, std::string image_id = {});

/// Parses `{"image_id": ..., "points": [[x, y], ...]}`. When `bounds` holds
/// (height, width), points outside the raster are rejected.
PointSet read_points(std::string_view text,
                     std::optional<std::pair<int, int>> bounds = std::nullopt);
std::string write_points(const PointSet& points);

Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

ImageTile load_tile(const std::filesystem::path& path);
void save_tile(const std::filesystem::path& path, const ImageTile& tile);

}  // namespace wnet
