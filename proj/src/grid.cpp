#include "uot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uot/errors.hpp"

namespace uot {

namespace {

double containment_tol(const RegularGrid& g) {
  return 1e-10 * (1.0 + std::abs(g.lx) + std::abs(g.ly) + std::abs(g.x0) +
                  std::abs(g.y0));
}

void require_inside(const RegularGrid& g, double x, double y,
                    const char* what) {
  if (!g.contains(x, y)) {
    throw ConfigError(std::string(what) + ": point (" + std::to_string(x) +
                      ", " + std::to_string(y) + ") outside the domain");
  }
}

}  // namespace

namespace detail {

CellCoords locate_cell(const RegularGrid& g, double x, double y) {
  double tx = (x - g.x0) / g.hx();
  double ty = (y - g.y0) / g.hy();
  int i = std::clamp(static_cast<int>(std::floor(tx)), 0, g.nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(ty)), 0, g.ny - 2);
  double sx = std::clamp(tx - i, 0.0, 1.0);
  double sy = std::clamp(ty - j, 0.0, 1.0);
  const double snap = 1e-12;
  if (sx < snap) sx = 0.0;
  if (sx > 1.0 - snap) sx = 1.0;
  if (sy < snap) sy = 0.0;
  if (sy > 1.0 - snap) sy = 1.0;
  return {i, j, sx, sy};
}

}  // namespace detail

bool RegularGrid::contains(double x, double y) const {
  double tol = containment_tol(*this);
  return x >= x0 - tol && x <= x0 + lx + tol && y >= y0 - tol &&
         y <= y0 + ly + tol;
}

RegularGrid build_grid(int nx, int ny, double x0, double y0, double lx,
                       double ly) {
  if (nx < 2 || ny < 2) {
    throw ConfigError("build_grid: need at least 2 nodes per axis");
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw ConfigError("build_grid: extents must be positive and finite");
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    throw ConfigError("build_grid: origin must be finite");
  }
  return {nx, ny, x0, y0, lx, ly};
}

NodalField make_field(const RegularGrid& grid,
                      const std::function<double(double, double)>& f) {
  NodalField out(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      out.at(i, j) = f(grid.node_x(i), grid.node_y(j));
    }
  }
  return out;
}

double evaluate(const NodalField& field, double x, double y) {
  const RegularGrid& g = field.grid;
  require_inside(g, x, y, "evaluate");
  detail::CellCoords c = detail::locate_cell(g, x, y);
  double v00 = field.at(c.i, c.j);
  double v10 = field.at(c.i + 1, c.j);
  double v01 = field.at(c.i, c.j + 1);
  double v11 = field.at(c.i + 1, c.j + 1);
  return (1 - c.sx) * (1 - c.sy) * v00 + c.sx * (1 - c.sy) * v10 +
         (1 - c.sx) * c.sy * v01 + c.sx * c.sy * v11;
}

namespace {

// 1D differentiation along a row/column of nodal values: central inside,
// second-order one-sided at the ends (exact for linears either way).
double diff1d(double fm, double f0, double fp, double h, int where) {
  if (where == 0) return (fp - fm) / (2.0 * h);
  if (where < 0) return (-3.0 * f0 + 4.0 * fm - fp) / (2.0 * h);
  return (3.0 * f0 - 4.0 * fm + fp) / (2.0 * h);
}

}  // namespace

NodalField derivative_x(const NodalField& field) {
  const RegularGrid& g = field.grid;
  NodalField out(g);
  double h = g.hx();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.nx == 2) {
        out.at(i, j) = (field.at(1, j) - field.at(0, j)) / h;
      } else if (i == 0) {
        out.at(i, j) =
            diff1d(field.at(1, j), field.at(0, j), field.at(2, j), h, -1);
      } else if (i == g.nx - 1) {
        out.at(i, j) = diff1d(field.at(i - 1, j), field.at(i, j),
                              field.at(i - 2, j), h, +1);
      } else {
        out.at(i, j) =
            diff1d(field.at(i - 1, j), field.at(i, j), field.at(i + 1, j), h,
                   0);
      }
    }
  }
  return out;
}

NodalField derivative_y(const NodalField& field) {
  const RegularGrid& g = field.grid;
  NodalField out(g);
  double h = g.hy();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.ny == 2) {
        out.at(i, j) = (field.at(i, 1) - field.at(i, 0)) / h;
      } else if (j == 0) {
        out.at(i, j) =
            diff1d(field.at(i, 1), field.at(i, 0), field.at(i, 2), h, -1);
      } else if (j == g.ny - 1) {
        out.at(i, j) = diff1d(field.at(i, j - 1), field.at(i, j),
                              field.at(i, j - 2), h, +1);
      } else {
        out.at(i, j) =
            diff1d(field.at(i, j - 1), field.at(i, j), field.at(i, j + 1), h,
                   0);
      }
    }
  }
  return out;
}

std::array<double, 2> gradient_at(const NodalField& field, double x,
                                  double y) {
  require_inside(field.grid, x, y, "gradient_at");
  NodalField gx = derivative_x(field);
  NodalField gy = derivative_y(field);
  return {evaluate(gx, x, y), evaluate(gy, x, y)};
}

double integrate(const NodalField& field) {
  const RegularGrid& g = field.grid;
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      row += wx * field.at(i, j);
    }
    sum += wy * row;
  }
  return sum * g.hx() * g.hy();
}

double l2_norm(const NodalField& field) {
  const RegularGrid& g = field.grid;
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
      double v = field.at(i, j);
      row += wx * v * v;
    }
    sum += wy * row;
  }
  return std::sqrt(sum * g.hx() * g.hy());
}

double min_value(const NodalField& field) {
  return *std::min_element(field.values.begin(), field.values.end());
}

double max_value(const NodalField& field) {
  return *std::max_element(field.values.begin(), field.values.end());
}

bool all_finite(const NodalField& field) {
  return std::all_of(field.values.begin(), field.values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace uot
