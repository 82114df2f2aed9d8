#pragma once

#include <stdexcept>
#include <string>

namespace helmdd {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

/// A pivot fell below working precision during an LU factorization.
struct SingularMatrixError : Error {
  SingularMatrixError(const std::string& what, int pivot)
      : Error(what), pivot_index(pivot) {}
  int pivot_index = -1;
};

/// A matrix required to be Hermitian positive definite failed the
/// Cholesky test; pivot_index is the first offending diagonal entry.
struct NotPositiveDefiniteError : Error {
  NotPositiveDefiniteError(const std::string& what, int pivot)
      : Error(what), pivot_index(pivot) {}
  int pivot_index = -1;
};

/// Impedance whose symmetric part is not positive definite.
struct CoercivityError : Error {
  CoercivityError(const std::string& what, double rayleigh)
      : Error(what), min_rayleigh(rayleigh) {}
  double min_rayleigh = 0.0;
};

/// Malformed input stream; position carries a line number when known.
struct ParseError : Error {
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  long line_number = -1;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace helmdd
