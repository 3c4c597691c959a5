#include "wnet/detect/padding.hpp"

#include "wnet/error.hpp"

namespace wnet::detect {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

std::pair<ImageTile, CropRecord> pad_to_multiple(const ImageTile& tile, int factor) {
  if (factor < 1) throw Error(ErrorKind::config, "padding factor must be >= 1");
  const CropRecord record{tile.height(), tile.width()};
  const int h = (tile.height() + factor - 1) / factor * factor;
  const int w = (tile.width() + factor - 1) / factor * factor;
  if (h == tile.height() && w == tile.width()) return {tile, record};
  std::vector<double> data(static_cast<std::size_t>(h) * w * 3);
  for (int r = 0; r < h; ++r) {
    const int sr = reflect_index(r, tile.height());
    for (int c = 0; c < w; ++c) {
      const int sc = reflect_index(c, tile.width());
      for (int ch = 0; ch < 3; ++ch) data[(static_cast<std::size_t>(r) * w + c) * 3 + ch] = tile.at(sr, sc, ch);
    }
  }
  return {ImageTile(tile.id(), h, w, std::move(data)), record};
}

DensityMask crop_back(const DensityMask& raster, const CropRecord& record) {
  if (record.height > raster.height() || record.width > raster.width()) {
    throw Error(ErrorKind::shape, "crop record exceeds raster extent");
  }
  if (record.height == raster.height() && record.width == raster.width()) return raster;
  std::vector<double> data(static_cast<std::size_t>(record.height) * record.width);
  for (int r = 0; r < record.height; ++r) {
    for (int c = 0; c < record.width; ++c) data[static_cast<std::size_t>(r) * record.width + c] = raster.at(r, c);
  }
  return DensityMask(raster.image_id(), record.height, record.width, std::move(data));
}

}  // namespace wnet::detect
