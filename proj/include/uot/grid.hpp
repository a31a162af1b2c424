#pragma once

#include <array>
#include <functional>
#include <vector>

namespace uot {

/// Axis-aligned rectangle, used for the computational domain and the scan
/// region of interest.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(double x, double y, double tol = 0.0) const {
    return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
  }
  bool operator==(const Rect&) const = default;
};

/// Uniform rectangular mesh. Node (i,j) maps to flat index j*nx+i and sits at
/// (x0 + i*hx, y0 + j*hy). Lengths are in cm throughout.
struct RegularGrid {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 0.0;
  double ly = 0.0;

  double hx() const { return lx / (nx - 1); }
  double hy() const { return ly / (ny - 1); }
  int num_nodes() const { return nx * ny; }
  int node_index(int i, int j) const { return j * nx + i; }
  double node_x(int i) const { return x0 + i * hx(); }
  double node_y(int j) const { return y0 + j * hy(); }
  Rect domain() const { return {x0, y0, x0 + lx, y0 + ly}; }
  bool is_boundary_node(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  /// Closure membership with a small relative slack for rounded coordinates.
  bool contains(double x, double y) const;

  bool operator==(const RegularGrid&) const = default;
};

/// Validates the mesh parameters. Throws ConfigError for nx/ny < 2 or
/// nonpositive extents.
RegularGrid build_grid(int nx, int ny, double x0, double y0, double lx,
                       double ly);

/// Scalar field sampled at grid nodes, stored row-major (flat index j*nx+i).
struct NodalField {
  RegularGrid grid;
  std::vector<double> values;

  NodalField() = default;
  NodalField(const RegularGrid& g, double fill = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.num_nodes()), fill) {}

  double& at(int i, int j) { return values[grid.node_index(i, j)]; }
  double at(int i, int j) const { return values[grid.node_index(i, j)]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// Samples f(x, y) at every node.
NodalField make_field(const RegularGrid& grid,
                      const std::function<double(double, double)>& f);

/// Bilinear interpolation. Throws ConfigError if (x, y) is outside the
/// closure of the domain.
double evaluate(const NodalField& field, double x, double y);

/// Nodal derivative field along x (central differences inside, second-order
/// one-sided at the boundary).
NodalField derivative_x(const NodalField& field);
NodalField derivative_y(const NodalField& field);

/// Gradient at an arbitrary point: bilinear interpolation of the two nodal
/// derivative fields.
std::array<double, 2> gradient_at(const NodalField& field, double x, double y);

/// Integral of the bilinear interpolant over the domain (tensor-product
/// trapezoidal rule).
double integrate(const NodalField& field);

/// Mass-weighted L2 norm sqrt(integral of f^2).
double l2_norm(const NodalField& field);

double min_value(const NodalField& field);
double max_value(const NodalField& field);
bool all_finite(const NodalField& field);

namespace detail {

/// Cell containing (x, y) plus local coordinates in [0, 1]^2, snapped to
/// nodes within 1e-12 so exact node queries stay exact.
struct CellCoords {
  int i = 0, j = 0;
  double sx = 0.0, sy = 0.0;
};

CellCoords locate_cell(const RegularGrid& grid, double x, double y);

}  // namespace detail

}  // namespace uot
