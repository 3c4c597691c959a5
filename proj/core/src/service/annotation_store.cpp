#include "wnet/service/annotation_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "wnet/codec.hpp"
#include "wnet/error.hpp"

namespace wnet::service {

std::string_view to_string(Provenance p) { return p == Provenance::manual ? "manual" : "detected"; }

Provenance provenance_from_string(std::string_view s) {
  if (s == "manual") return Provenance::manual;
  if (s == "detected") return Provenance::detected;
  throw Error(ErrorKind::format, "unknown provenance '" + std::string(s) + "'");
}

PointSet ImageRecord::point_set() const {
  std::vector<Point> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back({p.x, p.y});
  return PointSet(image_id, std::move(pts));
}

std::string write_guiding_signal(const GuidingSignal& signal) {
  nlohmann::json doc;
  doc["image_id"] = signal.image_id;
  doc["revision"] = signal.revision;
  doc["points"] = nlohmann::json::array();
  for (const Point& p : signal.points) doc["points"].push_back({p.x, p.y});
  return doc.dump();
}

GuidingSignal read_guiding_signal(std::string_view text) {
  const PointSet pts = read_points(text);
  GuidingSignal g{pts.image_id(), 0, pts.points()};
  const auto doc = nlohmann::json::parse(text);
  if (!doc.contains("revision") || !doc["revision"].is_number_unsigned()) {
    throw Error(ErrorKind::format, "guiding signal needs a non-negative integer revision");
  }
  g.revision = doc["revision"].get<std::uint64_t>();
  return g;
}

namespace {

nlohmann::json record_to_json(const ImageRecord& r) {
  nlohmann::json doc;
  doc["image_id"] = r.image_id;
  doc["height"] = r.height;
  doc["width"] = r.width;
  doc["revision"] = r.revision;
  doc["next_point_id"] = r.next_point_id;
  doc["points"] = nlohmann::json::array();
  for (const auto& p : r.points) {
    doc["points"].push_back({{"id", p.id}, {"x", p.x}, {"y", p.y}, {"provenance", std::string(to_string(p.provenance))}});
  }
  return doc;
}

ImageRecord record_from_json(const nlohmann::json& doc) {
  ImageRecord r;
  r.image_id = doc.at("image_id").get<std::string>();
  r.height = doc.at("height").get<int>();
  r.width = doc.at("width").get<int>();
  r.revision = doc.at("revision").get<std::uint64_t>();
  r.next_point_id = doc.at("next_point_id").get<std::uint64_t>();
  for (const auto& p : doc.at("points")) {
    r.points.push_back({p.at("id").get<std::uint64_t>(), p.at("x").get<double>(), p.at("y").get<double>(),
                        provenance_from_string(p.at("provenance").get<std::string>())});
  }
  return r;
}

void check_image_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 128 && id != "." && id != ".." &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
                  });
  if (!ok) throw Error(ErrorKind::format, "image id must match [A-Za-z0-9_.-]{1,128}");
}

bool near_any(const std::vector<StoredPoint>& pts, Point p) {
  return std::any_of(pts.begin(), pts.end(), [&](const StoredPoint& q) {
    return std::hypot(q.x - p.x, q.y - p.y) < kDuplicateTolerance;
  });
}

}  // namespace

struct AnnotationStore::Entry {
  std::mutex mutex;
  ImageRecord record;
  std::optional<ImageTile> tile;
};

AnnotationStore::AnnotationStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    std::filesystem::create_directories(dir_ / "images");
    std::filesystem::create_directories(dir_ / "tiles");
    recover();
  }
}

AnnotationStore::~AnnotationStore() = default;

void AnnotationStore::recover() {
  for (const auto& f : std::filesystem::directory_iterator(dir_ / "images")) {
    if (f.path().extension() != ".json") continue;
    auto e = std::make_shared<Entry>();
    e->record = record_from_json(nlohmann::json::parse(read_text_file(f.path())));
    e->tile = decode_tile(read_file(dir_ / "tiles" / (e->record.image_id + ".ppm")), e->record.image_id);
    entries_[e->record.image_id] = e;
  }
  const auto wal = dir_ / "wal.log";
  if (std::filesystem::exists(wal)) {
    std::ifstream in(wal);
    std::string line;
    while (std::getline(in, line)) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        break;  // torn tail from an interrupted append
      }
      ImageRecord r = record_from_json(doc);
      auto it = entries_.find(r.image_id);
      if (it == entries_.end() || r.revision <= it->second->record.revision) continue;
      write_file_atomic(dir_ / "images" / (r.image_id + ".json"), record_to_json(r).dump());
      it->second->record = std::move(r);
    }
    in.close();
    std::filesystem::remove(wal);
  }
}

std::shared_ptr<AnnotationStore::Entry> AnnotationStore::entry(const std::string& image_id) const {
  std::shared_lock lock(index_mutex_);
  const auto it = entries_.find(image_id);
  if (it == entries_.end()) throw Error(ErrorKind::not_found, "unknown image '" + image_id + "'");
  return it->second;
}

void AnnotationStore::commit(Entry& e, ImageRecord next) {
  next.revision = e.record.revision + 1;
  if (!dir_.empty()) {
    const std::string line = record_to_json(next).dump();
    {
      std::lock_guard wal_lock(wal_mutex_);
      std::ofstream out(dir_ / "wal.log", std::ios::app);
      out << line << '\n';
      out.flush();
      if (!out) throw Error(ErrorKind::io, "cannot append to write-ahead log");
    }
    write_file_atomic(dir_ / "images" / (next.image_id + ".json"), line);
  }
  e.record = std::move(next);
}

ImageRecord AnnotationStore::add_image(const ImageTile& tile) {
  check_image_id(tile.id());
  std::unique_lock lock(index_mutex_);
  if (entries_.count(tile.id())) throw Error(ErrorKind::conflict, "image '" + tile.id() + "' already exists");
  auto e = std::make_shared<Entry>();
  e->record.image_id = tile.id();
  e->record.height = tile.height();
  e->record.width = tile.width();
  e->tile = tile;
  if (!dir_.empty()) {
    save_tile(dir_ / "tiles" / (tile.id() + ".ppm"), tile);
    write_file_atomic(dir_ / "images" / (tile.id() + ".json"), record_to_json(e->record).dump());
  }
  entries_[tile.id()] = e;
  return e->record;
}

bool AnnotationStore::contains(const std::string& image_id) const {
  std::shared_lock lock(index_mutex_);
  return entries_.count(image_id) != 0;
}

std::vector<std::string> AnnotationStore::image_ids() const {
  std::shared_lock lock(index_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, e] : entries_) ids.push_back(id);
  return ids;
}

ImageRecord AnnotationStore::get(const std::string& image_id) const {
  auto e = entry(image_id);
  std::lock_guard lock(e->mutex);
  return e->record;
}

ImageTile AnnotationStore::tile(const std::string& image_id) const {
  auto e = entry(image_id);
  std::lock_guard lock(e->mutex);
  return *e->tile;
}

ImageRecord AnnotationStore::add_point(const std::string& image_id, Point p) {
  auto e = entry(image_id);
  std::lock_guard lock(e->mutex);
  PointSet(image_id, {p}).check_bounds(e->record.height, e->record.width);
  if (near_any(e->record.points, p)) {
    throw Error(ErrorKind::duplicate, "a point already exists at (" + std::to_string(p.x) + "," +
                                          std::to_string(p.y) + ")");
  }
  ImageRecord next = e->record;
  next.points.push_back({next.next_point_id++, p.x, p.y, Provenance::manual});
  commit(*e, std::move(next));
  return e->record;
}

ImageRecord AnnotationStore::delete_point(const std::string& image_id, std::uint64_t point_id) {
  auto e = entry(image_id);
  std::lock_guard lock(e->mutex);
  ImageRecord next = e->record;
  const auto it = std::find_if(next.points.begin(), next.points.end(),
                               [&](const StoredPoint& p) { return p.id == point_id; });
  if (it == next.points.end()) {
    throw Error(ErrorKind::not_found, "image '" + image_id + "' has no point " + std::to_string(point_id));
  }
  next.points.erase(it);
  commit(*e, std::move(next));
  return e->record;
}

ImageRecord AnnotationStore::replace_detected(const std::string& image_id, const std::vector<Point>& detections) {
  auto e = entry(image_id);
  std::lock_guard lock(e->mutex);
  PointSet(image_id, detections).check_bounds(e->record.height, e->record.width);
  ImageRecord next = e->record;
  std::erase_if(next.points, [](const StoredPoint& p) { return p.provenance == Provenance::detected; });
  const std::vector<StoredPoint> manual = next.points;
  for (const Point& p : detections) {
    if (near_any(manual, p)) continue;
    next.points.push_back({next.next_point_id++, p.x, p.y, Provenance::detected});
  }
  commit(*e, std::move(next));
  return e->record;
}

GuidingSignal AnnotationStore::guiding_signal(const std::string& image_id) const {
  const ImageRecord r = get(image_id);
  GuidingSignal g{r.image_id, r.revision, {}};
  for (const auto& p : r.points) g.points.push_back({p.x, p.y});
  return g;
}

void AnnotationStore::export_guiding_signal(const std::string& image_id, const std::filesystem::path& path) const {
  write_file_atomic(path, write_guiding_signal(guiding_signal(image_id)));
}

}  // namespace wnet::service
