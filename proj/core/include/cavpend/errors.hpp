#pragma once

#include <stdexcept>
#include <string>

namespace cavpend {

// Bad user-supplied parameter (radius, step size, sweep values, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or topologically invalid triangulation.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear solve failed or a discrete invariant (positivity, ...) broke.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration file or override.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cavpend
