#pragma once

#include <stdexcept>
#include <string>

namespace catw {

// Operators or states defined on different Hilbert layouts were combined.
struct LayoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Physical parameters violate a precondition (matching conditions, state
// normalization, non-physical rates, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An integrator detected norm/trace drift beyond tolerance, or was asked to
// run with inconsistent settings.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed configuration input. The message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested run does not fit the dense-density-matrix resource budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace catw
