#pragma once

#include <stdexcept>
#include <string>

namespace pdmp {

/// Raised when a numerical procedure (quadrature, root finding, fixed-point
/// iteration) fails to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the grid oracle when too much probability leaves [lower, y_max].
class GridLeakageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdmp

namespace pdmp {

/// Invalid experiment or model configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pdmp
