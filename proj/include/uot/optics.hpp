#pragma once

#include <array>
#include <string>

#include "uot/grid.hpp"

namespace uot {

/// Optical medium description: spatially varying absorption mu (cm^-1),
/// constant reduced scattering mus_prime (cm^-1), and the refractive-mismatch
/// boundary constant gamma.
struct OpticalCoefficients {
  NodalField mu;
  double mus_prime = 0.0;
  double gamma = 0.0;

  /// Throws ConfigError unless mu > 0 everywhere, mus_prime > 0, gamma > 0.
  void validate() const;
  /// Model-validity flag: true when max(mu) > 0.1 * mus_prime, i.e. the
  /// medium is not clearly turbid. Warned about, never enforced.
  bool turbidity_warning() const;
};

/// Diffusion coefficient D(x) = 1 / (3 (mu(x) + mus_prime)), in cm.
NodalField diffusion_coefficient(const OpticalCoefficients& coeffs);

enum class PhantomCase { uniform, disk_low, disk_high, multi };

PhantomCase parse_phantom_case(const std::string& name);
std::string phantom_case_name(PhantomCase c);

/// Absorption phantoms on [0,5]^2 (cm): a disk of radius 0.5 at (2.5, 2.5)
/// with contrast 1.2 (disk_low) or 10 (disk_high), or three disks with
/// contrasts between 1.2 and 2.0 (multi). Nodes are classified by center
/// membership, giving staircase boundaries.
NodalField make_phantom(PhantomCase c, const RegularGrid& grid, double mu_bar);

/// Ultrasound focus shape: anisotropic Gaussian or idealized perfect focus
/// |p|^2 = delta(x - xi).
struct UltrasoundShape {
  bool perfect = false;
  double sigma1 = 0.0;
  double sigma2 = 0.0;

  static UltrasoundShape gaussian(double s1, double s2);
  static UltrasoundShape perfect_focus() { return {true, 0.0, 0.0}; }
};

/// Nodal field of |p(x - center)|^2 for a Gaussian pressure
/// p(x) = C exp(-sum |x_j|^2 / sigma_j^2), normalized so the discrete
/// integral of |p|^2 over the domain equals 1. Perfect-focus shapes are not
/// representable as fields (use delta_load); requesting one throws.
NodalField gaussian_intensity(const RegularGrid& grid, double cx, double cy,
                              const UltrasoundShape& shape);

/// Lattice of ultrasound focus positions covering the region of interest U.
/// Foci are enumerated row-major: index j*n1+i at
/// (U.x0 + i*spacing1, U.y0 + j*spacing2).
struct ScanGrid {
  Rect region;
  int n1 = 0;
  int n2 = 0;

  double spacing1() const { return region.width() / (n1 - 1); }
  double spacing2() const { return region.height() / (n2 - 1); }
  int size() const { return n1 * n2; }
  int index(int i, int j) const { return j * n1 + i; }
  std::array<double, 2> focus(int k) const {
    return focus(k % n1, k / n1);
  }
  std::array<double, 2> focus(int i, int j) const {
    return {region.x0 + i * spacing1(), region.y0 + j * spacing2()};
  }
  bool operator==(const ScanGrid&) const = default;
};

/// Requires closure(U) strictly inside the domain and n1, n2 >= 2.
ScanGrid make_scan_grid(const Rect& domain, const Rect& U, int n1, int n2);

}  // namespace uot
