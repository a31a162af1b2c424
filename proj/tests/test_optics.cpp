#include <doctest.h>

#include <cmath>

#include "uot/errors.hpp"
#include "uot/optics.hpp"

using namespace uot;

TEST_CASE("diffusion coefficient values and monotonicity") {
  RegularGrid g = build_grid(5, 5, 0, 0, 5, 5);

  OpticalCoefficients c{NodalField(g, 0.023), 10.74, 0.431};
  NodalField d = diffusion_coefficient(c);
  CHECK(d.values[0] == doctest::Approx(1.0 / (3.0 * 10.763)));
  CHECK(d.values[0] == doctest::Approx(0.0309703).epsilon(1e-5));

  OpticalCoefficients c10{NodalField(g, 0.23), 10.74, 0.431};
  NodalField d10 = diffusion_coefficient(c10);
  CHECK(d10.values[0] == doctest::Approx(1.0 / (3.0 * 10.97)));
  CHECK(d10.values[0] == doctest::Approx(0.0303859).epsilon(1e-5));

  // increasing absorption strictly decreases D at every node
  OpticalCoefficients cb{NodalField(g, 0.023 + 0.01), 10.74, 0.431};
  NodalField db = diffusion_coefficient(cb);
  for (int k = 0; k < g.num_nodes(); ++k) CHECK(db.values[k] < d.values[k]);
}

TEST_CASE("diffusion coefficient is pointwise") {
  RegularGrid g = build_grid(7, 7, 0, 0, 5, 5);
  NodalField mu(g, 0.023);
  OpticalCoefficients base{mu, 10.74, 0.431};
  NodalField d0 = diffusion_coefficient(base);
  mu.at(3, 4) = 0.05;
  OpticalCoefficients bumped{mu, 10.74, 0.431};
  NodalField d1 = diffusion_coefficient(bumped);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i == 3 && j == 4) {
        CHECK(d1.at(i, j) != d0.at(i, j));
      } else {
        CHECK(d1.at(i, j) == d0.at(i, j));
      }
    }
  }
}

TEST_CASE("coefficient validation and turbidity warning") {
  RegularGrid g = build_grid(5, 5, 0, 0, 5, 5);
  CHECK_THROWS_AS(
      (OpticalCoefficients{NodalField(g, 0.0), 10.74, 0.431}.validate()),
      ConfigError);
  CHECK_THROWS_AS(
      (OpticalCoefficients{NodalField(g, 0.02), -1.0, 0.431}.validate()),
      ConfigError);
  CHECK(!OpticalCoefficients{NodalField(g, 0.23), 10.74, 0.431}
             .turbidity_warning());
  CHECK(OpticalCoefficients{NodalField(g, 2.0), 10.74, 0.431}
            .turbidity_warning());
}

TEST_CASE("phantoms: nodal values from the test cases") {
  // h = 0.1 puts the probe points exactly on nodes
  RegularGrid g = build_grid(51, 51, 0, 0, 5, 5);
  const double mu_bar = 0.023;

  NodalField low = make_phantom(PhantomCase::disk_low, g, mu_bar);
  CHECK(low.at(25, 25) == doctest::Approx(1.2 * mu_bar));  // (2.5, 2.5)
  CHECK(low.at(25, 25) == doctest::Approx(0.0276));
  CHECK(low.at(5, 5) == doctest::Approx(0.023));  // (0.5, 0.5)

  NodalField high = make_phantom(PhantomCase::disk_high, g, mu_bar);
  CHECK(high.at(25, 29) == doctest::Approx(0.23));  // (2.5, 2.9), inside

  CHECK_THROWS_AS(parse_phantom_case("hexagon"), ConfigError);
}

TEST_CASE("phantoms: bounds and boundary margin") {
  RegularGrid g = build_grid(101, 101, 0, 0, 5, 5);
  const double mu_bar = 0.023;
  for (PhantomCase c :
       {PhantomCase::disk_low, PhantomCase::disk_high, PhantomCase::multi}) {
    NodalField mu = make_phantom(c, g, mu_bar);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        double v = mu.at(i, j);
        CHECK(v >= mu_bar);
        CHECK(v <= 10 * mu_bar);
        double x = g.node_x(i), y = g.node_y(j);
        double margin =
            std::min(std::min(x, 5 - x), std::min(y, 5 - y));
        if (margin < 0.5) CHECK(v == mu_bar);
      }
    }
  }
}

TEST_CASE("phantom grid must cover the test-case domain") {
  RegularGrid small = build_grid(11, 11, 0, 0, 2, 2);
  CHECK_THROWS_AS(make_phantom(PhantomCase::disk_low, small, 0.023),
                  ConfigError);
}

TEST_CASE("gaussian intensity: normalization, symmetry, shape") {
  RegularGrid g = build_grid(129, 129, 0, 0, 5, 5);

  SUBCASE("discrete integral is one") {
    for (double s2 : {0.1, 0.3}) {
      NodalField p = gaussian_intensity(g, 2.17, 3.04,
                                        UltrasoundShape::gaussian(0.1, s2));
      CHECK(integrate(p) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  SUBCASE("x-y reflection symmetry for equal sigmas") {
    NodalField p =
        gaussian_intensity(g, 2.5, 2.5, UltrasoundShape::gaussian(0.1, 0.1));
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        CHECK(p.at(i, j) == doctest::Approx(p.at(j, i)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("elongated focus: half-max extent ratio near 3") {
    RegularGrid fine = build_grid(201, 201, 0, 0, 5, 5);
    NodalField p = gaussian_intensity(fine, 2.5, 2.5,
                                      UltrasoundShape::gaussian(0.1, 0.3));
    double half = 0.5 * max_value(p);
    int cx = 100, cy = 100;  // node at (2.5, 2.5)
    int nx_count = 0, ny_count = 0;
    for (int i = 0; i < fine.nx; ++i) {
      if (p.at(i, cy) >= half) ++nx_count;
    }
    for (int j = 0; j < fine.ny; ++j) {
      if (p.at(cx, j) >= half) ++ny_count;
    }
    double ratio = static_cast<double>(ny_count) / nx_count;
    CHECK(ratio > 2.5);
    CHECK(ratio < 3.5);
  }

  SUBCASE("translation covariance for whole-cell shifts") {
    NodalField a =
        gaussian_intensity(g, 2.0, 2.5, UltrasoundShape::gaussian(0.1, 0.1));
    // shift by 8 cells in x, 4 in y
    NodalField b = gaussian_intensity(g, 2.0 + 8 * g.hx(), 2.5 + 4 * g.hy(),
                                      UltrasoundShape::gaussian(0.1, 0.1));
    for (int j = 0; j + 4 < g.ny; ++j) {
      for (int i = 0; i + 8 < g.nx; ++i) {
        if (a.at(i, j) < 1e-30) continue;  // skip the underflowed far tail
        CHECK(b.at(i + 8, j + 4) ==
              doctest::Approx(a.at(i, j)).epsilon(1e-12));
      }
    }
  }

  SUBCASE("perfect focus is not a field") {
    CHECK_THROWS_AS(
        gaussian_intensity(g, 2.5, 2.5, UltrasoundShape::perfect_focus()),
        ConfigError);
    CHECK_THROWS_AS(UltrasoundShape::gaussian(0.0, 0.1), ConfigError);
  }
}

TEST_CASE("scan grid construction") {
  Rect omega{0, 0, 5, 5};

  ScanGrid scan = make_scan_grid(omega, {0.5, 0.5, 4.5, 4.5}, 100, 100);
  CHECK(scan.size() == 10000);
  CHECK(scan.spacing1() == doctest::Approx(4.0 / 99));
  CHECK(scan.spacing1() == doctest::Approx(0.0404).epsilon(1e-2));

  ScanGrid corners = make_scan_grid(omega, {0.5, 0.5, 4.5, 4.5}, 2, 2);
  CHECK(corners.focus(0)[0] == doctest::Approx(0.5));
  CHECK(corners.focus(0)[1] == doctest::Approx(0.5));
  CHECK(corners.focus(3)[0] == doctest::Approx(4.5));
  CHECK(corners.focus(3)[1] == doctest::Approx(4.5));

  // row-major enumeration
  ScanGrid s53 = make_scan_grid(omega, {1, 1, 4, 4}, 5, 3);
  CHECK(s53.index(2, 1) == 7);
  CHECK(s53.focus(7)[0] == doctest::Approx(s53.focus(2, 1)[0]));
  CHECK(s53.focus(7)[1] == doctest::Approx(s53.focus(2, 1)[1]));

  // the closure of U must be strictly inside the domain
  CHECK_THROWS_AS(make_scan_grid(omega, {0, 0, 5, 5}, 4, 4), ConfigError);
  CHECK_THROWS_AS(make_scan_grid(omega, {0.5, 0.5, 5.0, 4.5}, 4, 4),
                  ConfigError);
  CHECK_THROWS_AS(make_scan_grid(omega, {0.5, 0.5, 4.5, 4.5}, 1, 4),
                  ConfigError);
}
