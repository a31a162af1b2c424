#include "uot/optics.hpp"

#include <cmath>

#include "uot/errors.hpp"

namespace uot {

void OpticalCoefficients::validate() const {
  if (mu.values.empty() || min_value(mu) <= 0.0 || !all_finite(mu)) {
    throw ConfigError("optical coefficients: mu must be positive and finite");
  }
  if (!(mus_prime > 0.0)) {
    throw ConfigError("optical coefficients: mus_prime must be positive");
  }
  if (!(gamma > 0.0)) {
    throw ConfigError("optical coefficients: gamma must be positive");
  }
}

bool OpticalCoefficients::turbidity_warning() const {
  return max_value(mu) > 0.1 * mus_prime;
}

NodalField diffusion_coefficient(const OpticalCoefficients& coeffs) {
  coeffs.validate();
  NodalField d(coeffs.mu.grid);
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    d.values[k] = 1.0 / (3.0 * (coeffs.mu.values[k] + coeffs.mus_prime));
  }
  return d;
}

PhantomCase parse_phantom_case(const std::string& name) {
  if (name == "uniform") return PhantomCase::uniform;
  if (name == "disk_low") return PhantomCase::disk_low;
  if (name == "disk_high") return PhantomCase::disk_high;
  if (name == "multi") return PhantomCase::multi;
  throw ConfigError("unknown phantom case '" + name + "'");
}

std::string phantom_case_name(PhantomCase c) {
  switch (c) {
    case PhantomCase::uniform: return "uniform";
    case PhantomCase::disk_low: return "disk_low";
    case PhantomCase::disk_high: return "disk_high";
    case PhantomCase::multi: return "multi";
  }
  throw ConfigError("unknown phantom case tag");
}

namespace {

struct Disk {
  double cx, cy, r, contrast;
  bool inside(double x, double y) const {
    return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
  }
};

}  // namespace

NodalField make_phantom(PhantomCase c, const RegularGrid& grid,
                        double mu_bar) {
  if (!(mu_bar > 0.0)) {
    throw ConfigError("make_phantom: mu_bar must be positive");
  }
  Rect d = grid.domain();
  if (!(d.x0 <= 1e-9 && d.y0 <= 1e-9 && d.x1 >= 5.0 - 1e-9 &&
        d.y1 >= 5.0 - 1e-9)) {
    throw ConfigError("make_phantom: grid must cover [0,5]^2");
  }
  std::vector<Disk> disks;
  switch (c) {
    case PhantomCase::uniform:
      break;
    case PhantomCase::disk_low:
      disks = {{2.5, 2.5, 0.5, 1.2}};
      break;
    case PhantomCase::disk_high:
      disks = {{2.5, 2.5, 0.5, 10.0}};
      break;
    case PhantomCase::multi:
      // stand-in layout for the multiple-inclusion test case: three disks
      // with contrasts spanning [1.2, 2.0], including two nearby objects
      disks = {{1.5, 3.5, 0.4, 2.0}, {3.5, 3.5, 0.3, 1.5},
               {2.5, 1.5, 0.5, 1.2}};
      break;
  }
  NodalField mu(grid, mu_bar);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double x = grid.node_x(i), y = grid.node_y(j);
      for (const Disk& disk : disks) {
        if (disk.inside(x, y)) {
          mu.at(i, j) = disk.contrast * mu_bar;
          break;
        }
      }
    }
  }
  return mu;
}

UltrasoundShape UltrasoundShape::gaussian(double s1, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) {
    throw ConfigError("ultrasound shape: sigmas must be positive");
  }
  return {false, s1, s2};
}

NodalField gaussian_intensity(const RegularGrid& grid, double cx, double cy,
                              const UltrasoundShape& shape) {
  if (shape.perfect) {
    throw ConfigError(
        "gaussian_intensity: perfect focus is not representable as a field; "
        "use delta_load");
  }
  NodalField raw(grid);
  const double ax = 2.0 / (shape.sigma1 * shape.sigma1);
  const double ay = 2.0 / (shape.sigma2 * shape.sigma2);
  for (int j = 0; j < grid.ny; ++j) {
    double dy = grid.node_y(j) - cy;
    double ey = ay * dy * dy;
    for (int i = 0; i < grid.nx; ++i) {
      double dx = grid.node_x(i) - cx;
      raw.at(i, j) = std::exp(-(ax * dx * dx + ey));
    }
  }
  double mass = integrate(raw);
  if (!(mass > 0.0)) {
    throw ConfigError("gaussian_intensity: focus has no support on the grid");
  }
  for (double& v : raw.values) v /= mass;
  return raw;
}

ScanGrid make_scan_grid(const Rect& domain, const Rect& U, int n1, int n2) {
  if (n1 < 2 || n2 < 2) {
    throw ConfigError("make_scan_grid: need at least 2 foci per axis");
  }
  if (!(U.width() > 0.0 && U.height() > 0.0)) {
    throw ConfigError("make_scan_grid: empty scan region");
  }
  // the closure of U must sit strictly inside the domain
  if (!(U.x0 > domain.x0 && U.y0 > domain.y0 && U.x1 < domain.x1 &&
        U.y1 < domain.y1)) {
    throw ConfigError(
        "make_scan_grid: scan region must be strictly inside the domain");
  }
  return {U, n1, n2};
}

}  // namespace uot
