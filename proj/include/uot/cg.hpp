#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "uot/fem.hpp"

namespace uot {

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

struct CgOptions {
  double tol = 1e-10;  // relative residual ||Ax-b|| / ||b||
  int max_iter = 0;    // 0 means 10 * n
  /// Optional inspection hook, called every checkpoint_every iterations with
  /// the current iterate (used by tests to track the A-norm error).
  int checkpoint_every = 0;
  std::function<void(int, const std::vector<double>&)> on_checkpoint;
};

/// Jacobi-preconditioned conjugate gradients. Returns converged=false after
/// max_iter without aborting; throws ConfigError on dimension mismatch and
/// SolverError on a nonpositive diagonal.
std::pair<std::vector<double>, SolveReport> solve_cg(
    const SparseSystem& system, std::span<const double> rhs,
    const CgOptions& opts = {});

}  // namespace uot
