#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wnet {

/// Category of a failure. The CLI and the HTTP service map these onto exit
/// codes and status classes, so every thrown wnet::Error carries one.
enum class ErrorKind {
  format,        // malformed container or document
  channel,       // wrong number of raster channels
  range,         // value outside its admissible interval
  duplicate,     // coincident points
  out_of_bounds, // coordinate outside the bound raster
  shape,         // incompatible raster or tensor dimensions
  non_finite,    // NaN/Inf in a loss or gradient
  placement,     // synthetic scene could not be laid out
  config,        // invalid configuration value or key
  not_found,
  conflict,
  unavailable,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wnet
