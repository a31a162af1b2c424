#include "uot/forward.hpp"

#include <cmath>
#include <random>

#include "uot/errors.hpp"

namespace uot {

Edge parse_edge(const std::string& name) {
  if (name == "left") return Edge::left;
  if (name == "right") return Edge::right;
  if (name == "bottom") return Edge::bottom;
  if (name == "top") return Edge::top;
  throw ConfigError("unknown edge '" + name + "'");
}

std::string edge_name(Edge e) {
  switch (e) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
  }
  throw ConfigError("unknown edge tag");
}

std::function<double(double, double)> SourceSpec::boundary_function(
    const RegularGrid& grid) const {
  if (magnitude < 0.0) {
    throw ConfigError("source: magnitude must be >= 0");
  }
  const double tol =
      1e-9 * (1.0 + std::abs(grid.lx) + std::abs(grid.ly));
  const Rect d = grid.domain();
  const double m = magnitude;
  switch (edge) {
    case Edge::left:
      return [=](double x, double) { return std::abs(x - d.x0) <= tol ? m : 0.0; };
    case Edge::right:
      return [=](double x, double) { return std::abs(x - d.x1) <= tol ? m : 0.0; };
    case Edge::bottom:
      return [=](double, double y) { return std::abs(y - d.y0) <= tol ? m : 0.0; };
    case Edge::top:
      return [=](double, double y) { return std::abs(y - d.y1) <= tol ? m : 0.0; };
  }
  throw ConfigError("unknown edge tag");
}

std::string measurement_path_name(MeasurementPath p) {
  switch (p) {
    case MeasurementPath::direct: return "direct";
    case MeasurementPath::adjoint: return "adjoint";
    case MeasurementPath::loaded: return "loaded";
  }
  throw ConfigError("unknown measurement path tag");
}

MeasurementPath parse_measurement_path(const std::string& name) {
  if (name == "direct") return MeasurementPath::direct;
  if (name == "adjoint") return MeasurementPath::adjoint;
  if (name == "loaded") return MeasurementPath::loaded;
  throw ConfigError("unknown measurement path '" + name + "'");
}

std::pair<NodalField, SolveReport> solve_diffusion(
    const RegularGrid& grid, const NodalField& D, const NodalField& mu,
    double gamma, const std::vector<double>& rhs, const CgOptions& opts) {
  SparseSystem system = assemble_system(grid, D, mu, gamma);
  auto [x, report] = solve_cg(system, rhs, opts);
  if (!report.converged) {
    throw SolverError("diffusion solve did not converge (residual " +
                      std::to_string(report.rel_residual) + " after " +
                      std::to_string(report.iterations) + " iterations)");
  }
  NodalField field(grid);
  field.values = std::move(x);
  return {std::move(field), report};
}

namespace {

bool is_zero(const std::vector<double>& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

void check_positive(const NodalField& f, const char* what) {
  if (min_value(f) <= 0.0) {
    throw SolverError(std::string(what) +
                      ": discrete solution not strictly positive");
  }
}

void require_on_boundary(const RegularGrid& grid, std::array<double, 2> eta) {
  Rect d = grid.domain();
  double tol = 1e-9 * (1.0 + std::abs(grid.lx) + std::abs(grid.ly));
  bool on_edge = std::abs(eta[0] - d.x0) <= tol ||
                 std::abs(eta[0] - d.x1) <= tol ||
                 std::abs(eta[1] - d.y0) <= tol ||
                 std::abs(eta[1] - d.y1) <= tol;
  if (!on_edge || !grid.contains(eta[0], eta[1])) {
    throw ConfigError("detector must lie on the domain boundary");
  }
}

}  // namespace

NodalField solve_incident(const OpticalCoefficients& coeffs,
                          const SourceSpec& src, const RegularGrid& grid,
                          const CgOptions& opts) {
  coeffs.validate();
  if (!(coeffs.mu.grid == grid)) {
    throw ConfigError("solve_incident: coefficient grid mismatch");
  }
  NodalField D = diffusion_coefficient(coeffs);
  std::vector<double> rhs =
      assemble_rhs_boundary(grid, src.boundary_function(grid));
  auto [u, report] = solve_diffusion(grid, D, coeffs.mu, coeffs.gamma, rhs,
                                     opts);
  if (!is_zero(rhs)) check_positive(u, "solve_incident");
  return std::move(u);
}

NodalField solve_modulated(const OpticalCoefficients& coeffs,
                           const NodalField& u, const NodalField& p_sq,
                           double alpha, const CgOptions& opts) {
  coeffs.validate();
  const RegularGrid& grid = coeffs.mu.grid;
  if (!(u.grid == grid) || !(p_sq.grid == grid)) {
    throw ConfigError("solve_modulated: grid mismatch");
  }
  NodalField source(grid);
  for (std::size_t k = 0; k < source.values.size(); ++k) {
    source.values[k] = alpha * p_sq.values[k] * u.values[k];
  }
  NodalField D = diffusion_coefficient(coeffs);
  std::vector<double> rhs = assemble_rhs_volume(grid, source);
  auto [v, report] =
      solve_diffusion(grid, D, coeffs.mu, coeffs.gamma, rhs, opts);
  if (!is_zero(rhs) && min_value(p_sq) >= 0.0) {
    check_positive(v, "solve_modulated");
  }
  return std::move(v);
}

MeasurementSet measure_direct(const OpticalCoefficients& coeffs,
                              const SourceSpec& src, const ScanGrid& scan,
                              const UltrasoundShape& shape,
                              std::array<double, 2> eta,
                              const RegularGrid& grid,
                              const ForwardOptions& opts) {
  coeffs.validate();
  require_on_boundary(grid, eta);
  MeasurementSet out;
  out.scan = scan;
  out.eta = eta;
  out.path = MeasurementPath::direct;
  out.shape = shape;
  out.values.resize(scan.size());

  NodalField u = solve_incident(coeffs, src, grid, opts.cg);
  out.pde_solves = 1;

  // assemble once; only the load changes per focus
  NodalField D = diffusion_coefficient(coeffs);
  SparseSystem system = assemble_system(grid, D, coeffs.mu, coeffs.gamma);

  for (int k = 0; k < scan.size(); ++k) {
    auto [fx, fy] = scan.focus(k);
    std::vector<double> rhs;
    if (shape.perfect) {
      rhs = delta_load(grid, fx, fy);
      double scale = opts.alpha * evaluate(u, fx, fy);
      for (double& v : rhs) v *= scale;
    } else {
      NodalField p_sq = gaussian_intensity(grid, fx, fy, shape);
      NodalField source(grid);
      for (std::size_t m = 0; m < source.values.size(); ++m) {
        source.values[m] = opts.alpha * p_sq.values[m] * u.values[m];
      }
      rhs = assemble_rhs_volume(grid, source);
    }
    auto [v, report] = solve_cg(system, rhs, opts.cg);
    if (!report.converged) {
      throw SolverError("measure_direct: solve for focus " +
                        std::to_string(k) + " did not converge");
    }
    ++out.pde_solves;
    NodalField vf(grid);
    vf.values = std::move(v);
    out.values[k] = evaluate(vf, eta[0], eta[1]);
  }
  return out;
}

MeasurementSet measure_adjoint(const OpticalCoefficients& coeffs,
                               const SourceSpec& src, const ScanGrid& scan,
                               const UltrasoundShape& shape,
                               std::array<double, 2> eta,
                               const RegularGrid& grid,
                               const ForwardOptions& opts) {
  coeffs.validate();
  require_on_boundary(grid, eta);
  MeasurementSet out;
  out.scan = scan;
  out.eta = eta;
  out.path = MeasurementPath::adjoint;
  out.shape = shape;
  out.values.resize(scan.size());

  NodalField u = solve_incident(coeffs, src, grid, opts.cg);
  NodalField D = diffusion_coefficient(coeffs);
  std::vector<double> eta_load = delta_load(grid, eta[0], eta[1]);
  auto [w, report] =
      solve_diffusion(grid, D, coeffs.mu, coeffs.gamma, eta_load, opts.cg);
  out.pde_solves = 2;

  for (int k = 0; k < scan.size(); ++k) {
    auto [fx, fy] = scan.focus(k);
    if (shape.perfect) {
      // the delta collapses the integral to a nodal product
      out.values[k] =
          opts.alpha * evaluate(w, fx, fy) * evaluate(u, fx, fy);
    } else {
      NodalField p_sq = gaussian_intensity(grid, fx, fy, shape);
      NodalField source(grid);
      for (std::size_t m = 0; m < source.values.size(); ++m) {
        source.values[m] = opts.alpha * p_sq.values[m] * u.values[m];
      }
      std::vector<double> rhs = assemble_rhs_volume(grid, source);
      double acc = 0.0;
      for (std::size_t m = 0; m < rhs.size(); ++m) {
        acc += w.values[m] * rhs[m];
      }
      out.values[k] = acc;
    }
  }
  return out;
}

MeasurementSet add_noise(const MeasurementSet& meas, double relative_level,
                         std::uint64_t seed) {
  if (relative_level < 0.0) {
    throw ConfigError("add_noise: level must be >= 0");
  }
  MeasurementSet out = meas;
  if (relative_level == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& h : out.values) {
    h *= 1.0 + relative_level * normal(rng);
  }
  return out;
}

}  // namespace uot
