#pragma once

#include <stdexcept>
#include <string>

namespace expms {

/// Raised when a user-supplied function produces a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a model factory detects inconsistent inputs.
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for invalid run/scheme/diagnostic combinations.
class ConfigurationError : public std::runtime_error {
 public:
  explicit ConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a linear system inside a step cannot be solved.
class LinearSolveError : public std::runtime_error {
 public:
  explicit LinearSolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace expms
