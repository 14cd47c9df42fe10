#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfid {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. alpha < 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration (grid/model mismatch, bad key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A model violates a constraint it is required to satisfy.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// The characteristic-function propagator blew up.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, int step, double max_abs)
      : Error(what), step_(step), max_abs_(max_abs) {}
  int step() const { return step_; }
  double max_abs() const { return max_abs_; }

 private:
  int step_;
  double max_abs_;
};

/// Dataset with nothing usable left in it.
class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfid
