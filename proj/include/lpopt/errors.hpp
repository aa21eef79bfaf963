#pragma once

#include <stdexcept>
#include <string>

namespace lpopt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument values: non-finite inputs, out-of-range parameters,
// malformed configuration.
struct InvalidInputError : Error {
  using Error::Error;
};

// Arithmetic between vectors whose representations or lengths differ.
struct ScaleMismatchError : Error {
  using Error::Error;
};

// An operation would need more integer bits than are available.
struct WidthOverflowError : Error {
  using Error::Error;
};

// No bit width satisfies the requested convergence condition.
struct InfeasiblePrecisionError : Error {
  using Error::Error;
};

// File-format or filesystem failures while loading/saving datasets and runs.
struct IoError : Error {
  using Error::Error;
};

}  // namespace lpopt
