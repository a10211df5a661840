#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cumdamage {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed documents, schema mismatches, invariant violations.
/// `path()` names the offending location (e.g. "costs.c_K") when known.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string path = {})
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A damage schedule whose scale parameter becomes nonpositive at some index.
class InvalidScheduleError : public ValidationError {
 public:
  InvalidScheduleError(const std::string& message, std::uint64_t index)
      : ValidationError(message), index_(index) {}

  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t index_;
};

/// A damage level above the initial strength.
class InvalidLevelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// No feasible candidate in an optimizer search space.
class InfeasibleSpaceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The requested engine cannot handle the scenario (e.g. direct evaluation
/// of non-exponential models).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A replication exceeded the shock iteration cap.
class NonterminatingError : public Error {
 public:
  struct PartialState {
    std::uint64_t replication = 0;
    std::uint64_t shocks = 0;
    double time = 0.0;
    double damage = 0.0;
  };

  NonterminatingError(const std::string& message, PartialState state)
      : Error(message), state_(state) {}

  const PartialState& state() const noexcept { return state_; }

 private:
  PartialState state_;
};

/// Internal consistency check failed inside a numerical routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cumdamage
