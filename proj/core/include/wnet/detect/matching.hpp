#pragma once

#include <span>
#include <string>
#include <vector>

#include "wnet/detect/peaks.hpp"
#include "wnet/image.hpp"

namespace wnet::detect {

inline constexpr double kDefaultMatchRadius = 5.0;

struct MatchReport {
  std::string image_id;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double match_radius = kDefaultMatchRadius;
};

/// Fills precision, recall and F1 from the counts. Both sides empty scores
/// 1/1/1; an empty side otherwise scores 0/0/0.
MatchReport score_counts(std::string image_id, std::size_t tp, std::size_t fp, std::size_t fn, double radius);

/// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall);

/// Maximum-cardinality one-to-one matching over pairs closer than `radius`
/// (strictly), found with augmenting paths.
MatchReport match(std::span<const Point> predicted, std::span<const Point> truth, double radius = kDefaultMatchRadius,
                  std::string image_id = {});
MatchReport match(const Detection& predicted, const PointSet& truth, double radius = kDefaultMatchRadius);

/// Size of a maximum matching; exposed for property tests.
std::size_t max_matching(std::span<const Point> left, std::span<const Point> right, double radius);

struct Aggregate {
  MatchReport micro;  // counts summed, then scored
  MatchReport macro;  // counts summed; P, R and F1 averaged per tile
};

/// Throws config for an empty list.
Aggregate aggregate(std::span<const MatchReport> reports);

}  // namespace wnet::detect
