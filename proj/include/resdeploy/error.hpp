#pragma once

#include <stdexcept>
#include <string>

namespace resdeploy {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad files, broken invariants, dimension mismatches.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An optimization problem that has no solution (e.g. demand above capacity).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown inside a solver (singular basis and the like).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (unknown method, out-of-range parameter).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace resdeploy
