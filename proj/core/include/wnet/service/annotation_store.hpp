#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wnet/image.hpp"

namespace wnet::service {

enum class Provenance { detected, manual };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct StoredPoint {
  std::uint64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  Provenance provenance = Provenance::manual;
  friend bool operator==(const StoredPoint&, const StoredPoint&) = default;
};

struct ImageRecord {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::uint64_t revision = 0;
  std::uint64_t next_point_id = 1;
  std::vector<StoredPoint> points;

  PointSet point_set() const;
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Point list handed to a point-driven segmentation model.
struct GuidingSignal {
  std::string image_id;
  std::uint64_t revision = 0;
  std::vector<Point> points;
};

/// `{"image_id": ..., "revision": n, "points": [[x, y], ...]}`
std::string write_guiding_signal(const GuidingSignal& signal);
GuidingSignal read_guiding_signal(std::string_view text);

/// Per-image point annotations with monotone revisions. Each image is
/// mutated under its own lock; every mutation bumps the revision by one, is
/// appended to a write-ahead log and then snapshotted to
/// <dir>/images/<id>.json. An empty directory keeps everything in memory.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path dir = {});
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  /// Registers a tile at revision 0. Throws conflict if the id exists.
  ImageRecord add_image(const ImageTile& tile);
  bool contains(const std::string& image_id) const;
  std::vector<std::string> image_ids() const;

  ImageRecord get(const std::string& image_id) const;
  ImageTile tile(const std::string& image_id) const;

  /// Inserts a manual point; throws duplicate within kDuplicateTolerance of
  /// an existing point and out_of_bounds outside the tile.
  ImageRecord add_point(const std::string& image_id, Point p);
  /// Throws not_found for an unknown point id.
  ImageRecord delete_point(const std::string& image_id, std::uint64_t point_id);
  /// Replaces every `detected` point with `detections`; `manual` points stay.
  /// Detections coinciding with a manual point are dropped.
  ImageRecord replace_detected(const std::string& image_id, const std::vector<Point>& detections);

  GuidingSignal guiding_signal(const std::string& image_id) const;
  void export_guiding_signal(const std::string& image_id, const std::filesystem::path& path) const;

 private:
  struct Entry;

  std::shared_ptr<Entry> entry(const std::string& image_id) const;
  void commit(Entry& e, ImageRecord next);
  void recover();

  std::filesystem::path dir_;
  mutable std::shared_mutex index_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  std::mutex wal_mutex_;
};

}  // namespace wnet::service
