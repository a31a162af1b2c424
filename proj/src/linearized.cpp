#include "uot/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uot/errors.hpp"

namespace uot {

namespace {

std::vector<char> region_mask(const RegularGrid& grid, const Rect& region) {
  std::vector<char> mask(grid.num_nodes(), 0);
  double tol = 1e-10 * (1.0 + std::abs(grid.lx) + std::abs(grid.ly));
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      mask[grid.node_index(i, j)] =
          region.contains(grid.node_x(i), grid.node_y(j), tol) ? 1 : 0;
    }
  }
  return mask;
}

NodalField restrict_to_region(const LinearizedContext& ctx,
                              const NodalField& f) {
  NodalField out = f;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!ctx.in_region[k]) out.values[k] = 0.0;
  }
  return out;
}

// 5-point Laplacian at interior nodes (zero on the boundary frame, which is
// never inside U).
NodalField laplacian(const NodalField& f) {
  const RegularGrid& g = f.grid;
  NodalField out(g);
  const double ix2 = 1.0 / (g.hx() * g.hx());
  const double iy2 = 1.0 / (g.hy() * g.hy());
  for (int j = 1; j + 1 < g.ny; ++j) {
    for (int i = 1; i + 1 < g.nx; ++i) {
      out.at(i, j) =
          (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) * ix2 +
          (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) * iy2;
    }
  }
  return out;
}

std::vector<double> solve_with(const LinearizedContext& ctx,
                               const std::vector<double>& rhs) {
  auto [x, report] = solve_cg(ctx.system, rhs, ctx.cg);
  if (!report.converged) {
    throw SolverError("linearized: potential solve did not converge");
  }
  return std::move(x);
}

// Perfect-focus measurements h(xi) = alpha G(eta, xi) u(xi) for absorption
// mu, solved with the context's constant diffusion (not D(mu)).
std::vector<double> perfect_focus_measurements(const LinearizedContext& ctx,
                                               const NodalField& mu,
                                               const ScanGrid& scan) {
  NodalField d_const(ctx.grid, ctx.d0);
  std::vector<double> src_rhs =
      assemble_rhs_boundary(ctx.grid, ctx.src.boundary_function(ctx.grid));
  auto [u, ru] =
      solve_diffusion(ctx.grid, d_const, mu, ctx.gamma, src_rhs, ctx.cg);

  // eta was snapped to a boundary node by build_context
  std::vector<double> load = delta_load(ctx.grid, ctx.eta[0], ctx.eta[1]);
  auto [g, rg] =
      solve_diffusion(ctx.grid, d_const, mu, ctx.gamma, load, ctx.cg);

  std::vector<double> h(scan.size());
  for (int k = 0; k < scan.size(); ++k) {
    auto [x, y] = scan.focus(k);
    h[k] = ctx.alpha * evaluate(g, x, y) * evaluate(u, x, y);
  }
  return h;
}

double scan_interior_norm(const std::vector<double>& v, const ScanGrid& scan) {
  double area = scan.spacing1() * scan.spacing2();
  double acc = 0.0;
  for (int j = 1; j + 1 < scan.n2; ++j) {
    for (int i = 1; i + 1 < scan.n1; ++i) {
      double x = v[scan.index(i, j)];
      acc += area * x * x;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

LinearizedContext build_context(const NodalField& mu0, const SourceSpec& src,
                                std::array<double, 2> eta,
                                const RegularGrid& grid, const Rect& region,
                                double mus_prime, double gamma, double alpha,
                                const CgOptions& cg) {
  if (!(mu0.grid == grid)) {
    throw ConfigError("build_context: mu0 grid mismatch");
  }
  if (min_value(mu0) <= 0.0) {
    throw ConfigError("build_context: mu0 must be positive");
  }
  if (!(mus_prime > 0.0) || !(gamma > 0.0)) {
    throw ConfigError("build_context: constants must be positive");
  }
  Rect d = grid.domain();
  if (!(region.x0 > d.x0 && region.y0 > d.y0 && region.x1 < d.x1 &&
        region.y1 < d.y1)) {
    throw ConfigError("build_context: U must be strictly inside the domain");
  }

  LinearizedContext ctx;
  ctx.grid = grid;
  ctx.region = region;
  ctx.mu0 = mu0;
  ctx.d0 = 1.0 / (3.0 * mus_prime);
  ctx.gamma = gamma;
  ctx.alpha = alpha;
  ctx.src = src;
  ctx.cg = cg;
  ctx.in_region = region_mask(grid, region);

  NodalField d_const(grid, ctx.d0);
  ctx.system = assemble_system(grid, d_const, mu0, gamma);

  std::vector<double> src_rhs =
      assemble_rhs_boundary(grid, src.boundary_function(grid));
  NodalField u0(grid);
  u0.values = solve_with(ctx, src_rhs);
  ctx.u0 = std::move(u0);

  // snap the detector like the Green's module does
  auto [ei, ej] = snap_to_boundary_node(grid, eta);
  ctx.eta = {grid.node_x(ei), grid.node_y(ej)};
  std::vector<double> load(grid.num_nodes(), 0.0);
  load[grid.node_index(ei, ej)] = 1.0;
  NodalField g_eta(grid);
  g_eta.values = solve_with(ctx, load);
  ctx.g_eta = std::move(g_eta);

  double c = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid.num_nodes(); ++k) {
    if (!ctx.in_region[k]) continue;
    c = std::min({c, ctx.u0.values[k], ctx.g_eta.values[k]});
  }
  if (!(c > 0.0)) {
    throw SolverError(
        "build_context: u0 or G0 not positive on U (discrete positivity "
        "violated)");
  }
  ctx.positivity_floor = c;

  // ratio u0/G0 and its differential factors, restricted to U
  NodalField ratio(grid);
  for (int k = 0; k < grid.num_nodes(); ++k) {
    ratio.values[k] = ctx.u0.values[k] / ctx.g_eta.values[k];
  }
  NodalField lap = laplacian(ratio);
  NodalField rx = derivative_x(ratio);
  NodalField ry = derivative_y(ratio);
  ctx.factor_a = NodalField(grid);
  ctx.factor_bx = NodalField(grid);
  ctx.factor_by = NodalField(grid);
  for (int k = 0; k < grid.num_nodes(); ++k) {
    if (!ctx.in_region[k]) continue;
    double inv_2u0 = 1.0 / (2.0 * ctx.u0.values[k]);
    ctx.factor_a.values[k] = -inv_2u0 * (-ctx.d0 * lap.values[k]);
    double du0 = ctx.d0 / ctx.u0.values[k];
    ctx.factor_bx.values[k] = du0 * rx.values[k];
    ctx.factor_by.values[k] = du0 * ry.values[k];
  }
  if (!all_finite(ctx.factor_a) || !all_finite(ctx.factor_bx) ||
      !all_finite(ctx.factor_by)) {
    throw SolverError("build_context: factor fields not finite on U");
  }
  return ctx;
}

NodalField potential_from_density(const LinearizedContext& ctx,
                                  const NodalField& g) {
  if (!(g.grid == ctx.grid)) {
    throw ConfigError("potential_from_density: grid mismatch");
  }
  NodalField g_u = restrict_to_region(ctx, g);
  NodalField rhs_field(ctx.grid);
  for (std::size_t k = 0; k < rhs_field.values.size(); ++k) {
    rhs_field.values[k] = ctx.g_eta.values[k] * g_u.values[k];
  }
  std::vector<double> rhs = assemble_rhs_volume(ctx.grid, rhs_field);
  NodalField phi(ctx.grid);
  phi.values = solve_with(ctx, rhs);
  return phi;
}

NodalField apply_K1(const LinearizedContext& ctx, const NodalField& g) {
  NodalField phi = potential_from_density(ctx, g);
  NodalField out(ctx.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = ctx.factor_a.values[k] * phi.values[k];
  }
  return out;
}

NodalField apply_K2(const LinearizedContext& ctx, const NodalField& g) {
  NodalField phi = potential_from_density(ctx, g);
  NodalField px = derivative_x(phi);
  NodalField py = derivative_y(phi);
  NodalField out(ctx.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = ctx.factor_bx.values[k] * px.values[k] +
                    ctx.factor_by.values[k] * py.values[k];
  }
  return out;
}

NodalField apply_F(const LinearizedContext& ctx, const NodalField& g) {
  NodalField g_u = restrict_to_region(ctx, g);
  NodalField phi = potential_from_density(ctx, g_u);
  NodalField px = derivative_x(phi);
  NodalField py = derivative_y(phi);
  NodalField out(ctx.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    double k1 = ctx.factor_a.values[k] * phi.values[k];
    double k2 = ctx.factor_bx.values[k] * px.values[k] +
                ctx.factor_by.values[k] * py.values[k];
    out.values[k] = g_u.values[k] - k1 - k2;
  }
  return out;
}

std::vector<double> rhs_from_measurement(const LinearizedContext& ctx,
                                         const ScanGrid& scan,
                                         const std::vector<double>& h1) {
  if (h1.size() != static_cast<std::size_t>(scan.size())) {
    throw ConfigError("rhs_from_measurement: array size mismatch");
  }
  std::vector<double> q(scan.size());
  std::vector<double> d_const(scan.size(), ctx.d0);
  std::vector<double> mu0_scan(scan.size()), u0_scan(scan.size());
  for (int k = 0; k < scan.size(); ++k) {
    auto [x, y] = scan.focus(k);
    double g = evaluate(ctx.g_eta, x, y);
    q[k] = h1[k] / (ctx.alpha * g);
    mu0_scan[k] = evaluate(ctx.mu0, x, y);
    u0_scan[k] = evaluate(ctx.u0, x, y);
  }
  std::vector<double> elliptic = fd_elliptic_on_scan(
      q, d_const, scan.n1, scan.n2, scan.spacing1(), scan.spacing2());
  std::vector<double> out(scan.size(), 0.0);
  for (int j = 1; j + 1 < scan.n2; ++j) {
    for (int i = 1; i + 1 < scan.n1; ++i) {
      int k = scan.index(i, j);
      out[k] = -(elliptic[k] + mu0_scan[k] * q[k]) / (2.0 * u0_scan[k]);
    }
  }
  return out;
}

std::vector<double> first_order_measurement(const LinearizedContext& ctx,
                                            const NodalField& mu1,
                                            const ScanGrid& scan) {
  NodalField mu1_u = restrict_to_region(ctx, mu1);
  NodalField rhs_field(ctx.grid);
  for (std::size_t k = 0; k < rhs_field.values.size(); ++k) {
    rhs_field.values[k] = -mu1_u.values[k] * ctx.u0.values[k];
  }
  std::vector<double> rhs = assemble_rhs_volume(ctx.grid, rhs_field);
  NodalField u1(ctx.grid);
  u1.values = solve_with(ctx, rhs);
  NodalField phi = potential_from_density(ctx, mu1_u);

  std::vector<double> h1(scan.size());
  for (int k = 0; k < scan.size(); ++k) {
    auto [x, y] = scan.focus(k);
    h1[k] = ctx.alpha * (evaluate(ctx.g_eta, x, y) * evaluate(u1, x, y) -
                         evaluate(ctx.u0, x, y) * evaluate(phi, x, y));
  }
  return h1;
}

std::vector<double> consistency_residual(const LinearizedContext& ctx,
                                         const NodalField& mu1,
                                         const ScanGrid& scan,
                                         const std::vector<double>& eps_list) {
  NodalField mu1_u = restrict_to_region(ctx, mu1);
  NodalField f_mu1 = apply_F(ctx, mu1_u);

  std::vector<double> f_foci(scan.size(), 0.0);
  std::vector<double> mu1_foci(scan.size(), 0.0);
  for (int k = 0; k < scan.size(); ++k) {
    auto [x, y] = scan.focus(k);
    f_foci[k] = evaluate(f_mu1, x, y);
    mu1_foci[k] = evaluate(mu1_u, x, y);
  }
  double denom = scan_interior_norm(mu1_foci, scan);
  if (!(denom > 0.0)) {
    // mu1 == 0: the residual is identically zero for every eps
    return std::vector<double>(eps_list.size(), 0.0);
  }

  std::vector<double> h0 = perfect_focus_measurements(ctx, ctx.mu0, scan);

  std::vector<double> out;
  out.reserve(eps_list.size());
  for (double eps : eps_list) {
    NodalField mu_eps = ctx.mu0;
    for (std::size_t k = 0; k < mu_eps.values.size(); ++k) {
      mu_eps.values[k] += eps * mu1_u.values[k];
    }
    if (min_value(mu_eps) <= 0.0) {
      throw ConfigError("consistency_residual: mu0 + eps*mu1 not positive");
    }
    std::vector<double> h_eps = perfect_focus_measurements(ctx, mu_eps, scan);
    std::vector<double> h1(scan.size());
    for (int k = 0; k < scan.size(); ++k) {
      h1[k] = (h_eps[k] - h0[k]) / eps;
    }
    std::vector<double> rhs = rhs_from_measurement(ctx, scan, h1);
    std::vector<double> diff(scan.size(), 0.0);
    for (int j = 1; j + 1 < scan.n2; ++j) {
      for (int i = 1; i + 1 < scan.n1; ++i) {
        int k = scan.index(i, j);
        diff[k] = f_foci[k] - rhs[k];
      }
    }
    out.push_back(scan_interior_norm(diff, scan) / denom);
  }
  return out;
}

double region_l2_norm(const LinearizedContext& ctx, const NodalField& f) {
  if (!(f.grid == ctx.grid)) {
    throw ConfigError("region_l2_norm: grid mismatch");
  }
  double area = ctx.grid.hx() * ctx.grid.hy();
  double acc = 0.0;
  for (int k = 0; k < ctx.grid.num_nodes(); ++k) {
    if (!ctx.in_region[k]) continue;
    acc += area * f.values[k] * f.values[k];
  }
  return std::sqrt(acc);
}

}  // namespace uot
