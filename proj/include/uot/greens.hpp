#pragma once

#include <array>

#include "uot/forward.hpp"

namespace uot {

/// The detector slice G(eta, .) of the Green's function, obtained from one
/// solve with a nodal delta load at eta. By symmetry of the assembled system
/// this equals G(., eta) on nodes.
struct GreensField {
  NodalField field;
  std::array<double, 2> eta{};            // snapped to a boundary node
  std::array<double, 2> eta_requested{};  // as given by the caller
  double snap_distance = 0.0;
};

/// Nearest boundary node to a requested detector position, as (i, j).
std::array<int, 2> snap_to_boundary_node(const RegularGrid& grid,
                                         std::array<double, 2> eta);

/// eta must lie on the domain boundary; it is snapped to the nearest
/// boundary node and the snap distance is recorded.
GreensField greens_from_detector(const OpticalCoefficients& coeffs,
                                 std::array<double, 2> eta,
                                 const RegularGrid& grid,
                                 const CgOptions& opts = {});

struct ScanValues {
  std::vector<double> values;
  bool all_positive = true;  // model violation flag when false
};

/// Bilinear evaluation of G(eta, .) at every focus of the scan grid.
ScanValues greens_on_scan(const GreensField& gf, const ScanGrid& scan);

}  // namespace uot
