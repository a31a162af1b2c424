#include "uot/cg.hpp"

#include <cmath>
#include <numeric>

#include "uot/errors.hpp"

namespace uot {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::pair<std::vector<double>, SolveReport> solve_cg(
    const SparseSystem& system, std::span<const double> rhs,
    const CgOptions& opts) {
  const int n = system.n;
  if (static_cast<int>(rhs.size()) != n) {
    throw ConfigError("solve_cg: dimension mismatch");
  }
  if (!(opts.tol > 0.0 && opts.tol < 1.0)) {
    throw ConfigError("solve_cg: tolerance must be in (0, 1)");
  }
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n;

  std::vector<double> inv_diag(n);
  for (int r = 0; r < n; ++r) {
    double d = system.entry(r, r);
    if (!(d > 0.0)) {
      throw SolverError("solve_cg: nonpositive diagonal, system not SPD");
    }
    inv_diag[r] = 1.0 / d;
  }

  std::vector<double> x(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  const double bnorm = norm(r);
  SolveReport report;
  if (bnorm == 0.0) {
    report.converged = true;
    return {std::move(x), report};
  }

  std::vector<double> z(n), p(n), q(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int k = 1; k <= max_iter; ++k) {
    system.multiply(p, q);
    double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw SolverError("solve_cg: curvature <= 0, system not SPD");
    }
    double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    report.iterations = k;
    report.rel_residual = norm(r) / bnorm;
    if (opts.checkpoint_every > 0 && opts.on_checkpoint &&
        k % opts.checkpoint_every == 0) {
      opts.on_checkpoint(k, x);
    }
    if (report.rel_residual <= opts.tol) {
      report.converged = true;
      return {std::move(x), report};
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    double rz_next = dot(r, z);
    double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  report.converged = false;
  return {std::move(x), report};
}

}  // namespace uot
