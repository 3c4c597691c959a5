#include "wnet/error.hpp"

namespace wnet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::format: return "format";
    case ErrorKind::channel: return "channel";
    case ErrorKind::range: return "range";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::out_of_bounds: return "out_of_bounds";
    case ErrorKind::shape: return "shape";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::placement: return "placement";
    case ErrorKind::config: return "config";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::unavailable: return "unavailable";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace wnet
