#include "uot/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "uot/errors.hpp"

namespace uot {

namespace {

// Q1 shape data at the 2x2 Gauss points of the reference square [-1,1]^2.
// Local node order: (0,0), (1,0), (0,1), (1,1) relative to the cell corner.
struct ShapeTables {
  // n[g][a]: shape a at Gauss point g; ds/dt[g][a]: reference derivatives.
  std::array<std::array<double, 4>, 4> n{};
  std::array<std::array<double, 4>, 4> ds{};
  std::array<std::array<double, 4>, 4> dt{};
};

ShapeTables make_shape_tables() {
  ShapeTables t;
  const double q = 1.0 / std::sqrt(3.0);
  const std::array<double, 4> gs = {-q, q, -q, q};
  const std::array<double, 4> gt = {-q, -q, q, q};
  const std::array<double, 4> xs = {-1.0, 1.0, -1.0, 1.0};
  const std::array<double, 4> xt = {-1.0, -1.0, 1.0, 1.0};
  for (int g = 0; g < 4; ++g) {
    for (int a = 0; a < 4; ++a) {
      t.n[g][a] = 0.25 * (1.0 + xs[a] * gs[g]) * (1.0 + xt[a] * gt[g]);
      t.ds[g][a] = 0.25 * xs[a] * (1.0 + xt[a] * gt[g]);
      t.dt[g][a] = 0.25 * xt[a] * (1.0 + xs[a] * gs[g]);
    }
  }
  return t;
}

const ShapeTables& shape_tables() {
  static const ShapeTables t = make_shape_tables();
  return t;
}

void check_field_on_grid(const RegularGrid& grid, const NodalField& f,
                         const char* what) {
  if (!(f.grid == grid) ||
      f.values.size() != static_cast<std::size_t>(grid.num_nodes())) {
    throw ConfigError(std::string(what) + ": field grid mismatch");
  }
}

// CSR pattern of the 9-point Q1 coupling on a structured grid; columns per
// row come out sorted by construction.
SparseSystem make_pattern(const RegularGrid& grid) {
  SparseSystem s;
  s.grid = grid;
  s.n = grid.num_nodes();
  s.row_ptr.assign(s.n + 1, 0);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      int count = 0;
      for (int dj = -1; dj <= 1; ++dj) {
        int jj = j + dj;
        if (jj < 0 || jj >= grid.ny) continue;
        for (int di = -1; di <= 1; ++di) {
          int ii = i + di;
          if (ii < 0 || ii >= grid.nx) continue;
          ++count;
        }
      }
      s.row_ptr[grid.node_index(i, j) + 1] = count;
    }
  }
  for (int r = 0; r < s.n; ++r) s.row_ptr[r + 1] += s.row_ptr[r];
  s.cols.resize(s.row_ptr.back());
  s.vals.assign(s.row_ptr.back(), 0.0);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      int pos = s.row_ptr[grid.node_index(i, j)];
      for (int dj = -1; dj <= 1; ++dj) {
        int jj = j + dj;
        if (jj < 0 || jj >= grid.ny) continue;
        for (int di = -1; di <= 1; ++di) {
          int ii = i + di;
          if (ii < 0 || ii >= grid.nx) continue;
          s.cols[pos++] = grid.node_index(ii, jj);
        }
      }
    }
  }
  return s;
}

int find_nz(const SparseSystem& s, int r, int c) {
  for (int k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
    if (s.cols[k] == c) return k;
  }
  throw ConfigError("sparse pattern lookup failed");
}

// Accumulates the (gamma/2) edge mass and the (1/2) edge load with 2-point
// Gauss along one boundary edge segment between nodes a and b.
template <typename AddMatrix, typename AddLoad>
void boundary_edge(const RegularGrid& grid, int a, int b, double len,
                   double ax, double ay, double bx, double by,
                   const AddMatrix& add_matrix, const AddLoad& add_load) {
  const double q = 1.0 / std::sqrt(3.0);
  const std::array<double, 2> pts = {-q, q};
  for (double t : pts) {
    double n0 = 0.5 * (1.0 - t);
    double n1 = 0.5 * (1.0 + t);
    double w = 0.5 * len;  // Gauss weight 1 times |J| = len/2
    double x = n0 * ax + n1 * bx;
    double y = n0 * ay + n1 * by;
    add_matrix(a, a, w * n0 * n0);
    add_matrix(a, b, w * n0 * n1);
    add_matrix(b, a, w * n1 * n0);
    add_matrix(b, b, w * n1 * n1);
    add_load(a, b, n0, n1, w, x, y);
  }
  (void)grid;
}

template <typename Fn>
void for_each_boundary_edge(const RegularGrid& grid, const Fn& fn) {
  for (int i = 0; i + 1 < grid.nx; ++i) {
    fn(grid.node_index(i, 0), grid.node_index(i + 1, 0), grid.hx(),
       grid.node_x(i), grid.y0, grid.node_x(i + 1), grid.y0);
    fn(grid.node_index(i, grid.ny - 1), grid.node_index(i + 1, grid.ny - 1),
       grid.hx(), grid.node_x(i), grid.y0 + grid.ly, grid.node_x(i + 1),
       grid.y0 + grid.ly);
  }
  for (int j = 0; j + 1 < grid.ny; ++j) {
    fn(grid.node_index(0, j), grid.node_index(0, j + 1), grid.hy(), grid.x0,
       grid.node_y(j), grid.x0, grid.node_y(j + 1));
    fn(grid.node_index(grid.nx - 1, j), grid.node_index(grid.nx - 1, j + 1),
       grid.hy(), grid.x0 + grid.lx, grid.node_y(j), grid.x0 + grid.lx,
       grid.node_y(j + 1));
  }
}

}  // namespace

void SparseSystem::multiply(std::span<const double> x,
                            std::span<double> y) const {
  for (int r = 0; r < n; ++r) {
    double acc = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      acc += vals[k] * x[cols[k]];
    }
    y[r] = acc;
  }
}

double SparseSystem::entry(int r, int c) const {
  for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
    if (cols[k] == c) return vals[k];
  }
  return 0.0;
}

SparseSystem assemble_system(const RegularGrid& grid, const NodalField& D,
                             const NodalField& mu, double gamma) {
  check_field_on_grid(grid, D, "assemble_system(D)");
  check_field_on_grid(grid, mu, "assemble_system(mu)");
  if (min_value(D) <= 0.0) {
    throw ConfigError("assemble_system: diffusion coefficient must be > 0");
  }
  if (min_value(mu) < 0.0) {
    throw ConfigError("assemble_system: absorption must be >= 0");
  }
  if (gamma < 0.0) {
    throw ConfigError("assemble_system: gamma must be >= 0");
  }

  SparseSystem s = make_pattern(grid);
  const ShapeTables& t = shape_tables();
  const double hx = grid.hx(), hy = grid.hy();
  const double jac = 0.25 * hx * hy;       // |J| of the reference map
  const double gx = 2.0 / hx, gy = 2.0 / hy;

  for (int cj = 0; cj + 1 < grid.ny; ++cj) {
    for (int ci = 0; ci + 1 < grid.nx; ++ci) {
      const std::array<int, 4> nodes = {
          grid.node_index(ci, cj), grid.node_index(ci + 1, cj),
          grid.node_index(ci, cj + 1), grid.node_index(ci + 1, cj + 1)};
      std::array<double, 4> dv, mv;
      for (int a = 0; a < 4; ++a) {
        dv[a] = D.values[nodes[a]];
        mv[a] = mu.values[nodes[a]];
      }
      std::array<std::array<double, 4>, 4> local{};
      for (int g = 0; g < 4; ++g) {
        double dg = 0.0, mg = 0.0;
        for (int a = 0; a < 4; ++a) {
          dg += t.n[g][a] * dv[a];
          mg += t.n[g][a] * mv[a];
        }
        for (int a = 0; a < 4; ++a) {
          for (int b = a; b < 4; ++b) {
            double grad = gx * t.ds[g][a] * gx * t.ds[g][b] +
                          gy * t.dt[g][a] * gy * t.dt[g][b];
            double v = jac * (dg * grad + mg * t.n[g][a] * t.n[g][b]);
            local[a][b] += v;
          }
        }
      }
      for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
          s.vals[find_nz(s, nodes[a], nodes[b])] += local[a][b];
          if (a != b) s.vals[find_nz(s, nodes[b], nodes[a])] += local[a][b];
        }
      }
    }
  }

  if (gamma > 0.0) {
    for_each_boundary_edge(
        grid, [&](int a, int b, double len, double ax, double ay, double bx,
                  double by) {
          boundary_edge(
              grid, a, b, len, ax, ay, bx, by,
              [&](int r, int c, double v) {
                s.vals[find_nz(s, r, c)] += 0.5 * gamma * v;
              },
              [](int, int, double, double, double, double, double) {});
        });
  }
  return s;
}

std::vector<double> assemble_rhs_volume(const RegularGrid& grid,
                                        const NodalField& f) {
  check_field_on_grid(grid, f, "assemble_rhs_volume");
  std::vector<double> b(grid.num_nodes(), 0.0);
  const ShapeTables& t = shape_tables();
  const double jac = 0.25 * grid.hx() * grid.hy();
  for (int cj = 0; cj + 1 < grid.ny; ++cj) {
    for (int ci = 0; ci + 1 < grid.nx; ++ci) {
      const std::array<int, 4> nodes = {
          grid.node_index(ci, cj), grid.node_index(ci + 1, cj),
          grid.node_index(ci, cj + 1), grid.node_index(ci + 1, cj + 1)};
      for (int g = 0; g < 4; ++g) {
        double fg = 0.0;
        for (int a = 0; a < 4; ++a) fg += t.n[g][a] * f.values[nodes[a]];
        double w = jac * fg;
        for (int a = 0; a < 4; ++a) b[nodes[a]] += w * t.n[g][a];
      }
    }
  }
  return b;
}

std::vector<double> assemble_rhs_boundary(
    const RegularGrid& grid, const std::function<double(double, double)>& S) {
  std::vector<double> b(grid.num_nodes(), 0.0);
  for_each_boundary_edge(grid, [&](int a, int bn, double len, double ax,
                                   double ay, double bx, double by) {
    boundary_edge(
        grid, a, bn, len, ax, ay, bx, by,
        [](int, int, double) {},
        [&](int na, int nb, double n0, double n1, double w, double x,
            double y) {
          double sv = 0.5 * S(x, y);
          b[na] += sv * w * n0;
          b[nb] += sv * w * n1;
        });
  });
  return b;
}

std::vector<double> delta_load(const RegularGrid& grid, double x, double y) {
  if (!grid.contains(x, y)) {
    throw ConfigError("delta_load: point outside the domain");
  }
  std::vector<double> b(grid.num_nodes(), 0.0);
  detail::CellCoords c = detail::locate_cell(grid, x, y);
  b[grid.node_index(c.i, c.j)] = (1 - c.sx) * (1 - c.sy);
  b[grid.node_index(c.i + 1, c.j)] = c.sx * (1 - c.sy);
  b[grid.node_index(c.i, c.j + 1)] = (1 - c.sx) * c.sy;
  b[grid.node_index(c.i + 1, c.j + 1)] = c.sx * c.sy;
  return b;
}

}  // namespace uot
