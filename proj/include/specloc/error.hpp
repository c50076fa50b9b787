#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace specloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validation failures: bad input, violated hypotheses, bad configuration.
/// The CLI maps these to exit status 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CoefficientError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Raised when an input violates one of (H1)-(H4), e.g. a degenerate Hessian.
class HypothesisError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConstraintError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failures. The CLI maps these to exit status 2.
class SolverError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public SolverError {
 public:
  explicit FactorizationError(double shift);
  double shift() const { return shift_; }

 private:
  double shift_;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(int iterations, std::vector<double> best_residuals);
  const std::vector<double>& best_residuals() const { return residuals_; }
  int iterations() const { return iterations_; }

 private:
  int iterations_;
  std::vector<double> residuals_;
};

/// Internal consistency check failed (e.g. an asymmetric effective tensor).
class ConsistencyError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace specloc
