#pragma once

#include <stdexcept>
#include <string>

namespace locasso {

/// A localized design whose kernel window contains no data points.
/// Downstream consumers refuse to operate on such designs.
struct EmptyWindowError : std::runtime_error {
  explicit EmptyWindowError(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

/// Numerical quadrature failed to reach the requested tolerance within
/// its resource budget. Never returned as a silently inaccurate result.
struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

/// Malformed configuration or data file; message names the offending field.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

}  // namespace locasso
