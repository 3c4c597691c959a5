#pragma once

#include "wnet/image.hpp"

namespace wnet::detect {

/// Original extent of a padded raster. Padding is only ever appended on the
/// bottom and right, so coordinates are unchanged by padding.
struct CropRecord {
  int height = 0;
  int width = 0;
};

/// Reflect-pads (mirror without repeating the edge sample) up to the next
/// multiple of `factor` in both dimensions.
std::pair<ImageTile, CropRecord> pad_to_multiple(const ImageTile& tile, int factor);

DensityMask crop_back(const DensityMask& raster, const CropRecord& record);

/// Index into [0, n) for a position past the end, reflecting at the borders.
int reflect_index(int i, int n);

}  // namespace wnet::detect
