#pragma once

#include <functional>
#include <span>
#include <vector>

#include "uot/grid.hpp"

namespace uot {

/// Symmetric positive definite system in compressed sparse row form,
/// discretizing -div(D grad u) + mu u with Robin boundary terms on a
/// RegularGrid (9-point coupling pattern of Q1 elements).
struct SparseSystem {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;
  RegularGrid grid;

  void multiply(std::span<const double> x, std::span<double> y) const;
  /// Stored entry (r, c), or 0 when outside the sparsity pattern.
  double entry(int r, int c) const;
};

/// Q1 assembly of the weak form
///   int D grad(u).grad(phi) + int mu u phi + (gamma/2) bdry-int u phi,
/// with D and mu interpolated bilinearly from nodal values and evaluated at
/// 2x2 Gauss points per cell; the boundary mass uses 2-point Gauss per edge.
/// The 1/2 comes from rearranging the Robin condition 2D du/dn + gamma u = S.
SparseSystem assemble_system(const RegularGrid& grid, const NodalField& D,
                             const NodalField& mu, double gamma);

/// Load vector with entries int f phi_i, same quadrature as the assembly.
std::vector<double> assemble_rhs_volume(const RegularGrid& grid,
                                        const NodalField& f);

/// Load vector (1/2) bdry-int S phi_i; S is evaluated at the edge Gauss
/// points. Nonzero only at boundary nodes.
std::vector<double> assemble_rhs_boundary(
    const RegularGrid& grid, const std::function<double(double, double)>& S);

/// Nodal point-source representation: entry i equals phi_i(point); entries
/// sum to 1. Preserves exact discrete reciprocity for symmetric systems.
std::vector<double> delta_load(const RegularGrid& grid, double x, double y);

}  // namespace uot
