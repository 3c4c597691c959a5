#pragma once

#include <memory>
#include <string>

#include "wnet/detect/detector.hpp"
#include "wnet/service/annotation_store.hpp"

namespace wnet::service {

/// HTTP front end of the annotation store.
///
///   POST   /images[?id=<id>]            body: binary PPM tile
///   GET    /images                      list image ids
///   POST   /images/{id}/detect          run the model, merge detections
///   GET    /images/{id}/points
///   POST   /images/{id}/points          body: {"x": .., "y": ..}
///   DELETE /images/{id}/points/{pid}
///   GET    /images/{id}/guiding-signal
///   GET    /images/{id}/tile            binary PPM, revision in X-Revision
///
/// JSON responses carry `revision`. Errors are {"error", "kind"} with status
/// 400 (bad input), 404 (unknown image or point), 409 (duplicate or existing
/// id) or 503 (no model loaded).
class HttpService {
 public:
  /// `detector` may be null; detect requests then answer 503.
  HttpService(std::shared_ptr<AnnotationStore> store, std::shared_ptr<const detect::Detector> detector);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port;
  /// returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wnet::service
