#pragma once

#include <array>
#include <vector>

#include "uot/recon.hpp"

namespace uot {

/// Frozen background state for the linearized measurement map: background
/// absorption mu0, constant diffusion d0 = 1/(3 mus_prime), the incident
/// field u0 and Green's slice g_eta, and the precomputed factor fields
///   A = -(1/(2 u0)) [-div(d0 grad)](u0 / g_eta)
///   B = (d0 / u0) grad(u0 / g_eta)
/// restricted to the region of interest U (zero outside).
struct LinearizedContext {
  RegularGrid grid;
  Rect region;  // U
  NodalField mu0;
  double d0 = 0.0;
  double gamma = 0.0;
  double alpha = 1.0;
  SourceSpec src;
  std::array<double, 2> eta{};
  NodalField u0;
  NodalField g_eta;
  NodalField factor_a;
  NodalField factor_bx;
  NodalField factor_by;
  std::vector<char> in_region;  // node mask for U
  double positivity_floor = 0.0;  // recorded min of u0, g_eta over U
  CgOptions cg;
  SparseSystem system;  // assembled once for (d0, mu0, gamma)

  bool node_in_region(int k) const { return in_region[k] != 0; }
};

/// Solves for u0 and g_eta with constant diffusion d0 and builds the factor
/// fields. Hard error if u0 or g_eta fails to stay positive on U.
LinearizedContext build_context(const NodalField& mu0, const SourceSpec& src,
                                std::array<double, 2> eta,
                                const RegularGrid& grid, const Rect& region,
                                double mus_prime, double gamma,
                                double alpha = 1.0, const CgOptions& cg = {});

/// phi(xi) = int_U G0(xi, z) g_eta(z) g(z) dz as one diffusion solve with
/// right-hand side g_eta * g and homogeneous Robin data. g is restricted to
/// U first.
NodalField potential_from_density(const LinearizedContext& ctx,
                                  const NodalField& g);

/// K1 g = A * phi(g), restricted to U.
NodalField apply_K1(const LinearizedContext& ctx, const NodalField& g);

/// K2 g = B . grad(phi(g)), restricted to U.
NodalField apply_K2(const LinearizedContext& ctx, const NodalField& g);

/// F g = g - K1 g - K2 g on U.
NodalField apply_F(const LinearizedContext& ctx, const NodalField& g);

/// Right-hand side of the linearized equation on the scan lattice:
///   -(1/(2 u0)) [-div(d0 grad) + mu0] (h1 / (alpha g_eta)),
/// central differences at interior foci, zeros on the ring.
std::vector<double> rhs_from_measurement(const LinearizedContext& ctx,
                                         const ScanGrid& scan,
                                         const std::vector<double>& h1);

/// First-order measurement perturbation for perturbation mu1 via the
/// first-order system (one solve for u1 plus one potential solve):
///   h1(xi) = alpha (g_eta(xi) u1(xi) - u0(xi) phi(mu1)(xi)).
/// Cross-checks the finite-difference path of consistency_residual.
std::vector<double> first_order_measurement(const LinearizedContext& ctx,
                                            const NodalField& mu1,
                                            const ScanGrid& scan);

/// For each eps, runs the nonlinear forward model (constant d0,
/// perfect-focus measurements) for mu0 and mu0 + eps*mu1, forms
/// h1 = (h_eps - h0)/eps, and returns
///   r(eps) = || F mu1 - rhs(h1) || / || mu1 ||
/// in the mass-weighted L2 metric over interior foci.
std::vector<double> consistency_residual(const LinearizedContext& ctx,
                                         const NodalField& mu1,
                                         const ScanGrid& scan,
                                         const std::vector<double>& eps_list);

/// Mass-weighted L2 norm over nodes of U (cell area times nodal values).
double region_l2_norm(const LinearizedContext& ctx, const NodalField& f);

}  // namespace uot
