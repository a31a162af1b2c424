#include "uot/greens.hpp"

#include <cmath>
#include <limits>

#include "uot/errors.hpp"

namespace uot {

std::array<int, 2> snap_to_boundary_node(const RegularGrid& grid,
                                         std::array<double, 2> eta) {
  double best = std::numeric_limits<double>::infinity();
  std::array<int, 2> node = {0, 0};
  auto consider = [&](int i, int j) {
    double dx = grid.node_x(i) - eta[0];
    double dy = grid.node_y(j) - eta[1];
    double d2 = dx * dx + dy * dy;
    if (d2 < best) {
      best = d2;
      node = {i, j};
    }
  };
  for (int i = 0; i < grid.nx; ++i) {
    consider(i, 0);
    consider(i, grid.ny - 1);
  }
  for (int j = 1; j + 1 < grid.ny; ++j) {
    consider(0, j);
    consider(grid.nx - 1, j);
  }
  return node;
}

GreensField greens_from_detector(const OpticalCoefficients& coeffs,
                                 std::array<double, 2> eta,
                                 const RegularGrid& grid,
                                 const CgOptions& opts) {
  coeffs.validate();
  if (!grid.contains(eta[0], eta[1])) {
    throw ConfigError("greens_from_detector: detector outside the domain");
  }
  auto [i, j] = snap_to_boundary_node(grid, eta);
  std::array<double, 2> snapped = {grid.node_x(i), grid.node_y(j)};

  std::vector<double> load(grid.num_nodes(), 0.0);
  load[grid.node_index(i, j)] = 1.0;

  NodalField D = diffusion_coefficient(coeffs);
  auto [g, report] =
      solve_diffusion(grid, D, coeffs.mu, coeffs.gamma, load, opts);

  GreensField out;
  out.field = std::move(g);
  out.eta = snapped;
  out.eta_requested = eta;
  out.snap_distance = std::hypot(snapped[0] - eta[0], snapped[1] - eta[1]);
  return out;
}

ScanValues greens_on_scan(const GreensField& gf, const ScanGrid& scan) {
  ScanValues out;
  out.values.resize(scan.size());
  for (int k = 0; k < scan.size(); ++k) {
    auto [x, y] = scan.focus(k);
    double v = evaluate(gf.field, x, y);
    out.values[k] = v;
    if (!(v > 0.0)) out.all_positive = false;
  }
  return out;
}

}  // namespace uot
