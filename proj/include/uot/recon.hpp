#pragma once

#include <functional>
#include <vector>

#include "uot/greens.hpp"

namespace uot {

struct ReconConfig {
  int max_iters = 40;
  double rel_change_tol = 1e-4;
  double relaxation = 1.0;  // omega in (0, 1]
  double mu_min = 1e-4;     // clamp range, cm^-1
  double mu_max = 1.0;
  bool smooth_measurements = false;  // 3x3 box filter for noisy data
  CgOptions cg;

  void validate() const;
};

/// Constants the iteration needs besides the data: the scattering and
/// boundary constants and the known background absorption mu_bar that is
/// pinned outside the region of interest.
struct ReconConstants {
  double mus_prime = 0.0;
  double gamma = 0.0;
  double mu_bar = 0.0;
};

struct ReconState {
  NodalField mu;
  int iterations = 0;
  std::vector<double> rel_change_history;
  bool converged = false;
  int w_floor_clamps = 0;  // nonpositive h/G ratios clamped to the floor
};

/// Canonical measurement scale: divides by the max-magnitude entry and
/// rounds significands to 30 bits, so reconstructions are exactly invariant
/// under h -> c*h (the quantization, ~5e-10 relative, is far below the
/// discretization error).
std::vector<double> canonicalize_scale(std::vector<double> values);

/// Flux-form central differences on the n1 x n2 scan lattice approximating
/// -div(D grad w) with arithmetic-mean face values; interior points only,
/// zeros on the outer ring. Requires n1, n2 >= 3.
std::vector<double> fd_elliptic_on_scan(const std::vector<double>& w,
                                        const std::vector<double>& d,
                                        int n1, int n2, double delta1,
                                        double delta2);

/// One fixed-point update: recompute D and G from mu_k, evaluate
/// mu = [div(D grad)](h/G) / (h/G) at interior foci, clamp, relax, pin
/// mu_bar on the scan ring and outside U, and interpolate back to the grid.
NodalField recon_step(const NodalField& mu_k, const MeasurementSet& meas,
                      const ReconConstants& consts, const ReconConfig& config,
                      int* w_floor_clamps = nullptr);

/// Iterates recon_step from mu == mu_bar until the relative change drops
/// below tol or max_iters is reached. Non-convergence is reported in the
/// state, not fatal.
ReconState run_reconstruction(
    const MeasurementSet& meas, const ReconConstants& consts,
    const RegularGrid& recon_grid, const ReconConfig& config,
    const std::function<void(int, const NodalField&)>& on_iterate = nullptr);

}  // namespace uot
