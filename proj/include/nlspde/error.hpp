#pragma once

#include <stdexcept>
#include <string>

namespace nlspde {

/// Base of every exception thrown by the library. `kind()` is the stable,
/// machine-readable tag the CLI writes into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Invalid user input: bad extents, unknown registry names, out-of-range values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

/// Iterative solver did not converge, or a factorization failed.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& message) : Error("solver", message) {}
};

/// The model itself is violated (e.g. a nonpositive nonlinearity integral).
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error("model", message) {}
};

/// NaN/Inf where none is allowed. Terminates a sample path, never the ensemble.
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& message) : Error("numerical_failure", message) {}
};

/// Operation requested on an input it is not defined for (e.g. q1 of coordinate noise).
class NotApplicable : public Error {
 public:
  explicit NotApplicable(const std::string& message) : Error("not_applicable", message) {}
};

/// Too few samples for an estimator, e.g. a derivative check with < 3 checkpoints.
class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& message) : Error("insufficient_data", message) {}
};

}  // namespace nlspde
