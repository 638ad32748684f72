#pragma once

#include <stdexcept>
#include <string>

namespace oddvar {

/// Base of every error raised by the library. The CLI maps the two
/// families below onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: parameters out of domain, misaligned grids, invalid
/// configs. Exit code 2 at the CLI.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: indefinite covariances, non-finite kernel values,
/// degenerate fits. Exit code 3 at the CLI.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line usage (unknown preset, missing argument). Exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GridError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ResolutionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ModelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class KernelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ReportError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace oddvar
