#include "wnet/service/http_service.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "wnet/codec.hpp"
#include "wnet/detect/report.hpp"
#include "wnet/error.hpp"

namespace wnet::service {
namespace {

using nlohmann::json;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict:
    case ErrorKind::duplicate: return 409;
    case ErrorKind::unavailable: return 503;
    case ErrorKind::format:
    case ErrorKind::channel:
    case ErrorKind::range:
    case ErrorKind::out_of_bounds:
    case ErrorKind::shape:
    case ErrorKind::config: return 400;
    default: return 500;
  }
}

json points_json(const ImageRecord& r) {
  json doc;
  doc["image_id"] = r.image_id;
  doc["revision"] = r.revision;
  doc["points"] = json::array();
  for (const auto& p : r.points) {
    doc["points"].push_back({{"id", p.id}, {"x", p.x}, {"y", p.y}, {"provenance", std::string(to_string(p.provenance))}});
  }
  return doc;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

struct HttpService::Impl {
  std::shared_ptr<AnnotationStore> store;
  std::shared_ptr<const detect::Detector> detector;
  httplib::Server server;
  std::thread thread;

  // Runs a handler, translating wnet errors into JSON error replies.
  template <typename Fn>
  auto guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        json body{{"error", e.what()}, {"kind", std::string(to_string(e.kind()))}};
        if (req.path_params.count("id") && store->contains(req.path_params.at("id"))) {
          body["revision"] = store->get(req.path_params.at("id")).revision;
        }
        reply(res, status_for(e.kind()), body);
      } catch (const json::exception& e) {
        reply(res, 400, {{"error", std::string("bad request body: ") + e.what()}, {"kind", "format"}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}, {"kind", "internal"}});
      }
    };
  }

  void routes() {
    server.Post("/images", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  std::string id = req.has_param("id") ? req.get_param_value("id")
                                                       : "img-" + std::to_string(store->image_ids().size() + 1);
                  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size());
                  const ImageRecord r = store->add_image(decode_tile(bytes, id));
                  reply(res, 201, {{"image_id", r.image_id}, {"revision", r.revision}, {"height", r.height},
                                   {"width", r.width}});
                }));
    server.Get("/images", guarded([this](const httplib::Request&, httplib::Response& res) {
                 reply(res, 200, {{"images", store->image_ids()}});
               }));
    server.Post("/images/:id/detect", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  if (!detector) throw Error(ErrorKind::unavailable, "no detection model loaded");
                  const std::string& id = req.path_params.at("id");
                  const detect::Detection d = detector->detect(store->tile(id));
                  std::vector<Point> pts;
                  for (const auto& c : d.centers) pts.push_back({c.x, c.y});
                  json body = points_json(store->replace_detected(id, pts));
                  body["centers"] = json::array();
                  for (const auto& c : d.centers) body["centers"].push_back({c.x, c.y, c.score});
                  reply(res, 200, body);
                }));
    server.Get("/images/:id/points", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 reply(res, 200, points_json(store->get(req.path_params.at("id"))));
               }));
    server.Post("/images/:id/points", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = json::parse(req.body);
                  if (!body.contains("x") || !body.contains("y") || !body["x"].is_number() || !body["y"].is_number()) {
                    throw Error(ErrorKind::format, "expected {\"x\": number, \"y\": number}");
                  }
                  const Point p{body["x"].get<double>(), body["y"].get<double>()};
                  reply(res, 201, points_json(store->add_point(req.path_params.at("id"), p)));
                }));
    server.Delete("/images/:id/points/:pid", guarded([this](const httplib::Request& req, httplib::Response& res) {
                    const std::string& pid = req.path_params.at("pid");
                    std::uint64_t point_id = 0;
                    try {
                      std::size_t used = 0;
                      point_id = std::stoull(pid, &used);
                      if (used != pid.size()) throw std::invalid_argument(pid);
                    } catch (const std::exception&) {
                      throw Error(ErrorKind::not_found, "no point '" + pid + "'");
                    }
                    reply(res, 200, points_json(store->delete_point(req.path_params.at("id"), point_id)));
                  }));
    server.Get("/images/:id/guiding-signal", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.status = 200;
                 res.set_content(write_guiding_signal(store->guiding_signal(req.path_params.at("id"))),
                                 "application/json");
               }));
    server.Get("/images/:id/tile", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string& id = req.path_params.at("id");
                 const ImageRecord r = store->get(id);
                 const Bytes ppm = encode_tile(store->tile(id));
                 res.status = 200;
                 res.set_header("X-Revision", std::to_string(r.revision));
                 res.set_content(std::string(ppm.begin(), ppm.end()), "image/x-portable-pixmap");
               }));
  }
};

HttpService::HttpService(std::shared_ptr<AnnotationStore> store, std::shared_ptr<const detect::Detector> detector)
    : impl_(std::make_unique<Impl>()) {
  if (!store) throw Error(ErrorKind::config, "service needs a store");
  impl_->store = std::move(store);
  impl_->detector = std::move(detector);
  impl_->routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpService::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error(ErrorKind::io, "cannot listen on " + host + ":" + std::to_string(port));
}

void HttpService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace wnet::service
