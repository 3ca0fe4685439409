#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chemo {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or grids of the operands do not match.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A time step violates a positivity condition. `admissible_dt()` is the
/// largest step the violated condition allows at the current state.
class StepSizeError : public Error {
 public:
  StepSizeError(const std::string& what, double admissible_dt, std::size_t cell)
      : Error(what), admissible_dt_(admissible_dt), cell_(cell) {}

  double admissible_dt() const noexcept { return admissible_dt_; }
  std::size_t cell() const noexcept { return cell_; }

 private:
  double admissible_dt_;
  std::size_t cell_;
};

/// Adaptive stepping could not make progress.
class StiffnessFailure : public Error {
 public:
  StiffnessFailure(const std::string& what, double time, std::size_t cell)
      : Error(what), time_(time), cell_(cell) {}

  double time() const noexcept { return time_; }
  std::size_t cell() const noexcept { return cell_; }

 private:
  double time_;
  std::size_t cell_;
};

/// Malformed or inconsistent input data (files on disk).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chemo
