#include "wnet/masks.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wnet/error.hpp"

namespace wnet {

void DensityConfig::validate() const {
  if (!(dot_radius > 0.0)) throw Error(ErrorKind::config, "dot_radius must be > 0");
  if (!(radius_px > dot_radius)) throw Error(ErrorKind::config, "radius_px must exceed dot_radius");
  if (!(sharpness > 0.0) || !std::isfinite(sharpness)) {
    throw Error(ErrorKind::config, "sharpness must be a finite value > 0");
  }
}

double density_value(double distance, const DensityConfig& cfg) {
  if (!(distance < cfg.radius_px)) return 0.0;
  // expm1 keeps both endpoints exact: expm1(0) == 0, and at D = 0 the ratio
  // has identical numerator and denominator.
  const double t = 1.0 - distance / cfg.radius_px;
  return std::clamp(std::expm1(cfg.sharpness * t) / std::expm1(cfg.sharpness), 0.0, 1.0);
}

namespace {

// Calls fn(index, distance) for every pixel whose center lies within `reach`
// of some point.
template <typename Fn>
void for_each_pixel_near(const PointSet& points, int height, int width, double reach, Fn&& fn) {
  for (const Point& p : points.points()) {
    const int r0 = std::max(0, static_cast<int>(std::floor(p.y - reach)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(p.y + reach)));
    const int c0 = std::max(0, static_cast<int>(std::floor(p.x - reach)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(p.x + reach)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        fn(static_cast<std::size_t>(r) * width + c, std::hypot(c - p.x, r - p.y));
      }
    }
  }
}

void check_target_shape(int height, int width) {
  if (height <= 0 || width <= 0) throw Error(ErrorKind::shape, "target raster must be non-empty");
}

}  // namespace

DensityMask render_density(const PointSet& points, int height, int width, const DensityConfig& cfg) {
  cfg.validate();
  check_target_shape(height, width);
  std::vector<double> data(static_cast<std::size_t>(height) * width, 0.0);
  for_each_pixel_near(points, height, width, cfg.radius_px, [&](std::size_t i, double dist) {
    data[i] = std::max(data[i], density_value(dist, cfg));
  });
  return DensityMask(points.image_id(), height, width, std::move(data));
}

BinaryMask render_dots(const PointSet& points, int height, int width, const DensityConfig& cfg) {
  cfg.validate();
  check_target_shape(height, width);
  std::vector<double> data(static_cast<std::size_t>(height) * width, 0.0);
  for_each_pixel_near(points, height, width, cfg.dot_radius, [&](std::size_t i, double dist) {
    if (dist <= cfg.dot_radius) data[i] = 1.0;
  });
  return BinaryMask(points.image_id(), height, width, std::move(data));
}

BinaryMask render_binary_target(const PointSet& points, int height, int width,
                                const DensityConfig& cfg) {
  cfg.validate();
  check_target_shape(height, width);
  std::vector<double> data(static_cast<std::size_t>(height) * width, 0.0);
  for_each_pixel_near(points, height, width, cfg.radius_px, [&](std::size_t i, double dist) {
    if (density_value(dist, cfg) > 0.0) data[i] = 1.0;
  });
  return BinaryMask(points.image_id(), height, width, std::move(data));
}

}  // namespace wnet
