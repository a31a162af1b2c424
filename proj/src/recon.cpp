#include "uot/recon.hpp"

#include <algorithm>
#include <cmath>

#include "uot/errors.hpp"

namespace uot {

void ReconConfig::validate() const {
  if (max_iters < 0) throw ConfigError("recon: max_iters must be >= 0");
  if (!(rel_change_tol > 0.0)) {
    throw ConfigError("recon: rel_change_tol must be positive");
  }
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw ConfigError("recon: relaxation must be in (0, 1]");
  }
  if (!(mu_min > 0.0 && mu_min < mu_max)) {
    throw ConfigError("recon: need 0 < mu_min < mu_max");
  }
}

namespace {

// Round to 30 significand bits (relative quantization ~5e-10). Exactly
// reproducible under h -> c*h together with the reference division below.
double round_significand(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  int e = 0;
  double m = std::frexp(x, &e);
  const double scale = 1073741824.0;  // 2^30
  return std::ldexp(std::round(m * scale) / scale, e);
}

std::vector<double> box_filter_3x3(const std::vector<double>& v, int n1,
                                   int n2) {
  std::vector<double> out(v.size());
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      double acc = 0.0;
      int count = 0;
      for (int dj = -1; dj <= 1; ++dj) {
        int jj = j + dj;
        if (jj < 0 || jj >= n2) continue;
        for (int di = -1; di <= 1; ++di) {
          int ii = i + di;
          if (ii < 0 || ii >= n1) continue;
          acc += v[jj * n1 + ii];
          ++count;
        }
      }
      out[j * n1 + i] = acc / count;
    }
  }
  return out;
}

}  // namespace

std::vector<double> canonicalize_scale(std::vector<double> values) {
  if (values.empty()) return values;
  std::size_t ref = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (std::abs(values[k]) > std::abs(values[ref])) ref = k;
  }
  double s = values[ref];
  if (s == 0.0) return values;
  for (double& v : values) v = round_significand(v / s);
  return values;
}

std::vector<double> fd_elliptic_on_scan(const std::vector<double>& w,
                                        const std::vector<double>& d,
                                        int n1, int n2, double delta1,
                                        double delta2) {
  if (n1 < 3 || n2 < 3) {
    throw ConfigError("fd_elliptic_on_scan: lattice must be at least 3x3");
  }
  if (w.size() != static_cast<std::size_t>(n1) * n2 || w.size() != d.size()) {
    throw ConfigError("fd_elliptic_on_scan: array size mismatch");
  }
  std::vector<double> out(w.size(), 0.0);
  const double ix2 = 1.0 / (delta1 * delta1);
  const double iy2 = 1.0 / (delta2 * delta2);
  for (int j = 1; j + 1 < n2; ++j) {
    for (int i = 1; i + 1 < n1; ++i) {
      int k = j * n1 + i;
      double dxp = 0.5 * (d[k] + d[k + 1]);
      double dxm = 0.5 * (d[k] + d[k - 1]);
      double dyp = 0.5 * (d[k] + d[k + n1]);
      double dym = 0.5 * (d[k] + d[k - n1]);
      double flux = (dxp * (w[k + 1] - w[k]) - dxm * (w[k] - w[k - 1])) * ix2 +
                    (dyp * (w[k + n1] - w[k]) - dym * (w[k] - w[k - n1])) * iy2;
      out[k] = -flux;  // matches -div(D grad w)
    }
  }
  return out;
}

namespace {

// Bilinear interpolation from the scan lattice back to the grid; nodes
// outside U take the pinned background value.
NodalField scan_to_grid(const std::vector<double>& scan_values,
                        const ScanGrid& scan, const RegularGrid& grid,
                        double background) {
  NodalField out(grid, background);
  const Rect& u = scan.region;
  const double d1 = scan.spacing1();
  const double d2 = scan.spacing2();
  for (int j = 0; j < grid.ny; ++j) {
    double y = grid.node_y(j);
    if (y <= u.y0 || y >= u.y1) continue;
    for (int i = 0; i < grid.nx; ++i) {
      double x = grid.node_x(i);
      if (x <= u.x0 || x >= u.x1) continue;
      double t1 = (x - u.x0) / d1;
      double t2 = (y - u.y0) / d2;
      int i1 = std::clamp(static_cast<int>(std::floor(t1)), 0, scan.n1 - 2);
      int j2 = std::clamp(static_cast<int>(std::floor(t2)), 0, scan.n2 - 2);
      double s1 = std::clamp(t1 - i1, 0.0, 1.0);
      double s2 = std::clamp(t2 - j2, 0.0, 1.0);
      double v00 = scan_values[scan.index(i1, j2)];
      double v10 = scan_values[scan.index(i1 + 1, j2)];
      double v01 = scan_values[scan.index(i1, j2 + 1)];
      double v11 = scan_values[scan.index(i1 + 1, j2 + 1)];
      out.at(i, j) = (1 - s1) * (1 - s2) * v00 + s1 * (1 - s2) * v10 +
                     (1 - s1) * s2 * v01 + s1 * s2 * v11;
    }
  }
  return out;
}

}  // namespace

NodalField recon_step(const NodalField& mu_k, const MeasurementSet& meas,
                      const ReconConstants& consts, const ReconConfig& config,
                      int* w_floor_clamps) {
  config.validate();
  const RegularGrid& grid = mu_k.grid;
  const ScanGrid& scan = meas.scan;
  if (meas.values.size() != static_cast<std::size_t>(scan.size())) {
    throw ConfigError("recon_step: measurement count mismatch");
  }

  OpticalCoefficients coeffs{mu_k, consts.mus_prime, consts.gamma};
  NodalField d_field = diffusion_coefficient(coeffs);
  GreensField gf = greens_from_detector(coeffs, meas.eta, grid, config.cg);
  ScanValues g_scan = greens_on_scan(gf, scan);

  std::vector<double> h = canonicalize_scale(meas.values);
  if (config.smooth_measurements) {
    h = box_filter_3x3(h, scan.n1, scan.n2);
  }

  // w = h / G, floored to stay positive where the discrete model misbehaves
  std::vector<double> w(h.size());
  double w_max = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    w[k] = h[k] / g_scan.values[k];
    w_max = std::max(w_max, w[k]);
  }
  if (!(w_max > 0.0)) {
    throw SolverError("recon_step: all measurement/Green ratios nonpositive");
  }
  const double w_floor = 1e-14 * w_max;
  int clamps = 0;
  for (double& v : w) {
    if (!(v > 0.0)) {
      v = w_floor;
      ++clamps;
    }
  }
  if (w_floor_clamps) *w_floor_clamps += clamps;

  std::vector<double> d_scan(scan.size());
  for (int k = 0; k < scan.size(); ++k) {
    auto [x, y] = scan.focus(k);
    d_scan[k] = evaluate(d_field, x, y);
  }

  std::vector<double> num = fd_elliptic_on_scan(
      w, d_scan, scan.n1, scan.n2, scan.spacing1(), scan.spacing2());

  // mu = [div(D grad)](h/G) / (h/G); fd_elliptic_on_scan carries the
  // -div(D grad) sign, hence the negation
  std::vector<double> mu_scan(scan.size(), consts.mu_bar);
  for (int j = 1; j + 1 < scan.n2; ++j) {
    for (int i = 1; i + 1 < scan.n1; ++i) {
      int k = scan.index(i, j);
      double raw = -num[k] / w[k];
      raw = std::clamp(raw, config.mu_min, config.mu_max);
      auto [x, y] = scan.focus(k);
      double prev = evaluate(mu_k, x, y);
      mu_scan[k] = (1.0 - config.relaxation) * prev + config.relaxation * raw;
    }
  }

  return scan_to_grid(mu_scan, scan, grid, consts.mu_bar);
}

ReconState run_reconstruction(
    const MeasurementSet& meas, const ReconConstants& consts,
    const RegularGrid& recon_grid, const ReconConfig& config,
    const std::function<void(int, const NodalField&)>& on_iterate) {
  config.validate();
  if (!(consts.mu_bar > 0.0)) {
    throw ConfigError("run_reconstruction: mu_bar must be positive");
  }
  ReconState state;
  state.mu = NodalField(recon_grid, consts.mu_bar);

  for (int k = 1; k <= config.max_iters; ++k) {
    NodalField next =
        recon_step(state.mu, meas, consts, config, &state.w_floor_clamps);
    double diff2 = 0.0, base2 = 0.0;
    for (std::size_t m = 0; m < next.values.size(); ++m) {
      double d = next.values[m] - state.mu.values[m];
      diff2 += d * d;
      base2 += state.mu.values[m] * state.mu.values[m];
    }
    double rel = std::sqrt(diff2) / std::sqrt(base2);
    state.mu = std::move(next);
    state.iterations = k;
    state.rel_change_history.push_back(rel);
    if (on_iterate) on_iterate(k, state.mu);
    if (rel < config.rel_change_tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace uot
