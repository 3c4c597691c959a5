#pragma once

#include <string>
#include <vector>

#include "wnet/image.hpp"

namespace wnet::detect {

struct Center {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
  friend bool operator==(const Center&, const Center&) = default;
};

struct Detection {
  std::string image_id;
  std::vector<Center> centers;

  PointSet to_points() const;
};

struct PeakConfig {
  double threshold = 0.3;
  double nms_min_distance = 4.0;

  void validate() const;
};

/// Pixels >= threshold that are no smaller than any of their 8 neighbours are
/// candidates. Candidates are visited by descending value (row-major order
/// among equal values) and accepted unless an accepted peak lies closer than
/// nms_min_distance. Centers are pixel centers (x = col, y = row).
Detection extract_peaks(const DensityMask& density, const PeakConfig& cfg);

}  // namespace wnet::detect
