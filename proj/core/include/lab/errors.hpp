#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lab {

/// Base class for every error raised by the lab library.
class LabError : public std::runtime_error {
public:
  explicit LabError(const std::string& what) : std::runtime_error(what) {}
};

class GridMismatchError : public LabError {
public:
  using LabError::LabError;
};

class GeometryError : public LabError {
public:
  using LabError::LabError;
};

class InfeasibleControlError : public LabError {
public:
  using LabError::LabError;
};

class UnsupportedFormError : public LabError {
public:
  using LabError::LabError;
};

/// Raised when an iterative solver exhausts its budget. Carries the last
/// residual norm so callers can report how close the run got.
class SolverError : public LabError {
public:
  SolverError(const std::string& what, double last_residual, int iterations)
      : LabError(what), last_residual(last_residual), iterations(iterations) {}
  double last_residual;
  int iterations;
};

/// Configuration parsing / validation failure. Collects every violation
/// found, not just the first one.
class ConfigError : public LabError {
public:
  explicit ConfigError(std::vector<std::string> violations)
      : LabError(join(violations)), violations(std::move(violations)) {}
  std::vector<std::string> violations;

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& e : v) {
      s += "\n  - " + e;
    }
    return s;
  }
};

}  // namespace lab
