#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wnet/detect/matching.hpp"
#include "wnet/detect/peaks.hpp"

namespace wnet::detect {

/// `{"image_id": ..., "centers": [[x, y, score], ...]}`
std::string write_detection(const Detection& d);
Detection read_detection(std::string_view text);

/// Accepts either a detection document or a points document.
PointSet read_prediction_points(std::string_view text);

/// Per-tile reports plus micro and macro blocks.
std::string write_evaluation_json(const std::vector<MatchReport>& tiles, const Aggregate& agg);

struct TableRow {
  std::string method;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Methods / P / R / F1 columns, values rounded to two decimals.
std::string format_table(const std::vector<TableRow>& rows);

}  // namespace wnet::detect
