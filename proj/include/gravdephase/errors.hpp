#pragma once

#include <stdexcept>
#include <string>

namespace gd {

/// Input outside the mathematical domain of an operation (negative time, zero vector, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// |a * (z - z0)| left the region where the linearized metric is valid.
class LinearizationError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A quadrature failed to reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gd
