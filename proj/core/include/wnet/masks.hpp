#pragma once

#include "wnet/image.hpp"

namespace wnet {

/// Parameters of the density target. Each center keeps value 1 and decays to
/// 0 at `radius_px`; `sharpness` controls how quickly.
struct DensityConfig {
  double radius_px = 7.0;
  double sharpness = 3.0;
  double dot_radius = 2.0;

  /// Throws config unless radius_px > dot_radius > 0 and sharpness > 0.
  void validate() const;
};

/// M(D) = (exp(a(1 - D/d)) - 1) / (exp(a) - 1) for D <= d, else 0.
/// M(0) = 1 and M(d) = 0 exactly.
double density_value(double distance, const DensityConfig& cfg);

/// Per-pixel maximum of density_value over all centers.
DensityMask render_density(const PointSet& points, int height, int width, const DensityConfig& cfg);

/// Pixels within dot_radius of some center.
BinaryMask render_dots(const PointSet& points, int height, int width, const DensityConfig& cfg);

/// Stage-1 target: the support of render_density.
BinaryMask render_binary_target(const PointSet& points, int height, int width,
                                const DensityConfig& cfg);

}  // namespace wnet
