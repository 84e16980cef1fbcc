#pragma once

#include <stdexcept>
#include <string>

namespace smallgain {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (negative radius, x < 0 into an
/// inhibition map, undefined function value).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed options: empty grids, bad tolerances, inconsistent configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples to form an estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A stage whose alpha/beta data violate the monotone-stage contract.
class InvalidStageError : public Error {
 public:
  InvalidStageError(const std::string& what, int stage_index = -1)
      : Error(stage_index >= 0 ? "stage " + std::to_string(stage_index) + ": " + what : what),
        stage_index_(stage_index) {}

  int stage_index() const noexcept { return stage_index_; }

 private:
  int stage_index_;
};

/// An interval propagated through a cascade left a stage's admissible range.
class ModelingError : public Error {
 public:
  ModelingError(const std::string& what, int stage_index)
      : Error("stage " + std::to_string(stage_index) + ": " + what), stage_index_(stage_index) {}

  int stage_index() const noexcept { return stage_index_; }

 private:
  int stage_index_;
};

/// A simulated state left its invariant interval by more than the clamp tolerance.
class InvarianceViolation : public Error {
 public:
  InvarianceViolation(const std::string& what, int stage_index, double time)
      : Error(what), stage_index_(stage_index), time_(time) {}

  int stage_index() const noexcept { return stage_index_; }
  double time() const noexcept { return time_; }

 private:
  int stage_index_;
  double time_;
};

}  // namespace smallgain
