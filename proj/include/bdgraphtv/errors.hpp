#pragma once

#include <stdexcept>
#include <string>

namespace bdgraphtv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed argument: wrong sizes, non-positive scales, bad indices.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Requested combination is outside what v1 supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// An integral that should be finite diverges (e.g. kernel second moment).
class InfeasibleIntegralError : public Error {
 public:
  using Error::Error;
};

/// Density violates its declared bounds or cannot be sampled efficiently.
class DensityError : public Error {
 public:
  using Error::Error;
};

class PathologicalDensityError : public DensityError {
 public:
  using DensityError::DensityError;
};

/// Iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gap)
      : Error(what), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

/// Probe spacing is below what the reference grid can resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Pointwise quantity requested where it is not defined (jump set).
class UndefinedPointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bdgraphtv
