#pragma once

#include <stdexcept>
#include <string>

namespace uot {

/// Bad configuration or precondition violation detected before any heavy work.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear solver failure (non-convergence, loss of positive definiteness,
/// discrete positivity violations of the diffusion model).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// File format or filesystem failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uot
