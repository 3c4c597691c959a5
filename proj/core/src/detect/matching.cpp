#include "wnet/detect/matching.hpp"

#include <cmath>

#include "wnet/error.hpp"

namespace wnet::detect {

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

MatchReport score_counts(std::string image_id, std::size_t tp, std::size_t fp, std::size_t fn, double radius) {
  MatchReport r;
  r.image_id = std::move(image_id);
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.match_radius = radius;
  if (tp + fp == 0 && tp + fn == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    return r;
  }
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

namespace {

class BipartiteMatcher {
 public:
  BipartiteMatcher(std::span<const Point> left, std::span<const Point> right, double radius)
      : adjacency_(left.size()), owner_(right.size(), kNone) {
    for (std::size_t i = 0; i < left.size(); ++i) {
      for (std::size_t j = 0; j < right.size(); ++j) {
        if (std::hypot(left[i].x - right[j].x, left[i].y - right[j].y) < radius) adjacency_[i].push_back(j);
      }
    }
  }

  std::size_t solve() {
    std::size_t matched = 0;
    for (std::size_t i = 0; i < adjacency_.size(); ++i) {
      visited_.assign(owner_.size(), false);
      if (augment(i)) ++matched;
    }
    return matched;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool augment(std::size_t i) {
    for (std::size_t j : adjacency_[i]) {
      if (visited_[j]) continue;
      visited_[j] = true;
      if (owner_[j] == kNone || augment(owner_[j])) {
        owner_[j] = i;
        return true;
      }
    }
    return false;
  }

  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> owner_;
  std::vector<bool> visited_;
};

}  // namespace

std::size_t max_matching(std::span<const Point> left, std::span<const Point> right, double radius) {
  return BipartiteMatcher(left, right, radius).solve();
}

MatchReport match(std::span<const Point> predicted, std::span<const Point> truth, double radius,
                  std::string image_id) {
  if (!(radius > 0.0)) throw Error(ErrorKind::config, "match radius must be > 0");
  const std::size_t tp = max_matching(predicted, truth, radius);
  return score_counts(std::move(image_id), tp, predicted.size() - tp, truth.size() - tp, radius);
}

MatchReport match(const Detection& predicted, const PointSet& truth, double radius) {
  std::vector<Point> pts;
  pts.reserve(predicted.centers.size());
  for (const Center& c : predicted.centers) pts.push_back({c.x, c.y});
  return match(pts, truth.points(), radius, truth.image_id().empty() ? predicted.image_id : truth.image_id());
}

Aggregate aggregate(std::span<const MatchReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::config, "cannot aggregate an empty list of reports");
  std::size_t tp = 0, fp = 0, fn = 0;
  double p = 0.0, r = 0.0, f = 0.0;
  for (const auto& rep : reports) {
    tp += rep.tp;
    fp += rep.fp;
    fn += rep.fn;
    p += rep.precision;
    r += rep.recall;
    f += rep.f1;
  }
  const double radius = reports.front().match_radius;
  Aggregate agg{score_counts("micro", tp, fp, fn, radius), score_counts("macro", tp, fp, fn, radius)};
  const double n = static_cast<double>(reports.size());
  agg.macro.precision = p / n;
  agg.macro.recall = r / n;
  agg.macro.f1 = f / n;
  return agg;
}

}  // namespace wnet::detect
