#include "wnet/detect/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "wnet/codec.hpp"
#include "wnet/error.hpp"

namespace wnet::detect {

std::string write_detection(const Detection& d) {
  nlohmann::json doc;
  doc["image_id"] = d.image_id;
  doc["centers"] = nlohmann::json::array();
  for (const Center& c : d.centers) doc["centers"].push_back({c.x, c.y, c.score});
  return doc.dump();
}

Detection read_detection(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("detection document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("image_id") || !doc["image_id"].is_string() || !doc.contains("centers") ||
      !doc["centers"].is_array()) {
    throw Error(ErrorKind::format, "detection document must be {\"image_id\": string, \"centers\": [[x, y, score], ...]}");
  }
  Detection d{doc["image_id"].get<std::string>(), {}};
  for (std::size_t i = 0; i < doc["centers"].size(); ++i) {
    const auto& c = doc["centers"][i];
    if (!c.is_array() || c.size() != 3 || !c[0].is_number() || !c[1].is_number() || !c[2].is_number()) {
      throw Error(ErrorKind::format, "centers[" + std::to_string(i) + "] must be [x, y, score]");
    }
    d.centers.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
  }
  return d;
}

PointSet read_prediction_points(std::string_view text) {
  if (text.find("\"centers\"") != std::string_view::npos) return read_detection(text).to_points();
  return read_points(text);
}

namespace {

nlohmann::json report_json(const MatchReport& r) {
  return {{"image_id", r.image_id}, {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"precision", r.precision},
          {"recall", r.recall}, {"f1", r.f1}, {"match_radius", r.match_radius}};
}

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string write_evaluation_json(const std::vector<MatchReport>& tiles, const Aggregate& agg) {
  nlohmann::json doc;
  doc["tiles"] = nlohmann::json::array();
  for (const auto& t : tiles) doc["tiles"].push_back(report_json(t));
  doc["micro"] = report_json(agg.micro);
  doc["macro"] = report_json(agg.macro);
  return doc.dump(2);
}

std::string format_table(const std::vector<TableRow>& rows) {
  std::size_t width = std::string("Methods").size();
  for (const auto& r : rows) width = std::max(width, r.method.size());
  std::ostringstream os;
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
  os << pad("Methods") << "  P     R     F1\n";
  for (const auto& r : rows) {
    os << pad(r.method) << "  " << two_decimals(r.precision) << "  " << two_decimals(r.recall) << "  "
       << two_decimals(r.f1) << "\n";
  }
  return os.str();
}

}  // namespace wnet::detect
