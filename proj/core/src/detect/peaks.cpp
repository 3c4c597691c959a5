#include "wnet/detect/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "wnet/error.hpp"

namespace wnet::detect {

void PeakConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::config, "peak threshold must be in (0,1)");
  if (!(nms_min_distance > 0.0)) throw Error(ErrorKind::config, "nms_min_distance must be > 0");
}

PointSet Detection::to_points() const {
  std::vector<Point> pts;
  pts.reserve(centers.size());
  for (const Center& c : centers) pts.push_back({c.x, c.y});
  return PointSet(image_id, std::move(pts));
}

namespace {

// Accepted peaks bucketed on a grid with cell size equal to the suppression
// distance, so only the 3x3 surrounding cells need checking.
class AcceptedGrid {
 public:
  explicit AcceptedGrid(double cell) : cell_(cell) {}

  bool has_within(double x, double y, double dist) const {
    const long cx = key(x), cy = key(y);
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        const auto it = cells_.find(pack(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& [px, py] : it->second) {
          if (std::hypot(px - x, py - y) < dist) return true;
        }
      }
    }
    return false;
  }

  void insert(double x, double y) { cells_[pack(key(x), key(y))].emplace_back(x, y); }

 private:
  long key(double v) const { return static_cast<long>(std::floor(v / cell_)); }
  static long long pack(long a, long b) { return (static_cast<long long>(a) << 32) ^ (b & 0xffffffffLL); }

  double cell_;
  std::unordered_map<long long, std::vector<std::pair<double, double>>> cells_;
};

}  // namespace

Detection extract_peaks(const DensityMask& density, const PeakConfig& cfg) {
  cfg.validate();
  const int h = density.height(), w = density.width();
  struct Candidate {
    double value;
    int index;
  };
  std::vector<Candidate> candidates;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double v = density.at(r, c);
      if (v < cfg.threshold) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if ((dr == 0 && dc == 0) || rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          if (density.at(rr, cc) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) candidates.push_back({v, r * w + c});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.value > b.value || (a.value == b.value && a.index < b.index);
  });

  Detection out{density.image_id(), {}};
  AcceptedGrid grid(cfg.nms_min_distance);
  for (const Candidate& cand : candidates) {
    const double x = cand.index % w, y = cand.index / w;
    if (grid.has_within(x, y, cfg.nms_min_distance)) continue;
    grid.insert(x, y);
    out.centers.push_back({x, y, cand.value});
  }
  return out;
}

}  // namespace wnet::detect
