#pragma once

#include <stdexcept>
#include <string>

namespace pd {

/// Camera-space depth at or below this threshold is treated as degenerate.
inline constexpr double kDepthEpsilon = 1e-6;  // meters

struct PointBehindCamera : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyRaster : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateConfiguration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateBody : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidValue : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pd
