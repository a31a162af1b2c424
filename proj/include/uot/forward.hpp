#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "uot/cg.hpp"
#include "uot/optics.hpp"

namespace uot {

enum class Edge { left, right, bottom, top };

Edge parse_edge(const std::string& name);
std::string edge_name(Edge e);

/// Boundary illumination: constant magnitude on one edge, zero elsewhere
/// (default: 1 on the left edge {x = x0}).
struct SourceSpec {
  Edge edge = Edge::left;
  double magnitude = 1.0;

  std::function<double(double, double)> boundary_function(
      const RegularGrid& grid) const;
};

enum class MeasurementPath { direct, adjoint, loaded };

std::string measurement_path_name(MeasurementPath p);
MeasurementPath parse_measurement_path(const std::string& name);

/// Scan measurements h(xi_i) = v^xi_i(eta) at a single boundary detector,
/// row-major in scan order.
struct MeasurementSet {
  ScanGrid scan;
  std::array<double, 2> eta{};
  std::vector<double> values;
  MeasurementPath path = MeasurementPath::loaded;
  UltrasoundShape shape;
  std::size_t pde_solves = 0;  // solves spent generating this set
};

struct ForwardOptions {
  double alpha = 1.0;  // proportionality constant in the modulated source
  CgOptions cg;
};

/// One diffusion solve: assemble -div(D grad) + mu with Robin constant gamma
/// and solve for the given load. Shared by the forward, Green's and
/// linearized paths. Throws SolverError on non-convergence.
std::pair<NodalField, SolveReport> solve_diffusion(
    const RegularGrid& grid, const NodalField& D, const NodalField& mu,
    double gamma, const std::vector<double>& rhs, const CgOptions& opts = {});

/// Incident light field: -div(D grad u) + mu u = 0 with Robin data S.
/// Checks u > 0 at every node for a nonzero source.
NodalField solve_incident(const OpticalCoefficients& coeffs,
                          const SourceSpec& src, const RegularGrid& grid,
                          const CgOptions& opts = {});

/// Modulated field: -div(D grad v) + mu v = alpha |p|^2 u, homogeneous Robin.
NodalField solve_modulated(const OpticalCoefficients& coeffs,
                           const NodalField& u, const NodalField& p_sq,
                           double alpha = 1.0, const CgOptions& opts = {});

/// Measurements by one modulated solve per focus.
MeasurementSet measure_direct(const OpticalCoefficients& coeffs,
                              const SourceSpec& src, const ScanGrid& scan,
                              const UltrasoundShape& shape,
                              std::array<double, 2> eta,
                              const RegularGrid& grid,
                              const ForwardOptions& opts = {});

/// Measurements via the reciprocity identity
///   v(eta) = alpha int u(x) |p(x)|^2 G(x, eta) dx:
/// one solve for w = G(., eta), then one discrete quadrature per focus.
/// Agrees with measure_direct up to solver tolerance.
MeasurementSet measure_adjoint(const OpticalCoefficients& coeffs,
                               const SourceSpec& src, const ScanGrid& scan,
                               const UltrasoundShape& shape,
                               std::array<double, 2> eta,
                               const RegularGrid& grid,
                               const ForwardOptions& opts = {});

/// Multiplicative Gaussian noise h_i *= 1 + level * z_i, deterministic per
/// seed.
MeasurementSet add_noise(const MeasurementSet& meas, double relative_level,
                         std::uint64_t seed);

}  // namespace uot
