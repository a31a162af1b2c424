#include <doctest.h>

#include <cmath>
#include <random>

#include "uot/cg.hpp"
#include "uot/errors.hpp"
#include "uot/fem.hpp"
#include "uot/grid.hpp"

using namespace uot;

TEST_CASE("build_grid basics") {
  RegularGrid g = build_grid(2, 2, 0, 0, 5, 5);
  CHECK(g.num_nodes() == 4);
  CHECK(g.hx() == doctest::Approx(5.0));
  CHECK(g.hy() == doctest::Approx(5.0));

  RegularGrid fine = build_grid(129, 129, 0, 0, 5, 5);
  CHECK(fine.hx() == doctest::Approx(5.0 / 128));
  CHECK(fine.hx() == doctest::Approx(0.0390625));

  RegularGrid r = build_grid(3, 2, 0, 0, 1, 1);
  CHECK(r.node_x(2) == doctest::Approx(1.0));
  CHECK(r.node_y(1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(build_grid(1, 5, 0, 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(build_grid(5, 1, 0, 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(build_grid(5, 5, 0, 0, 0, 1), ConfigError);
  CHECK_THROWS_AS(build_grid(5, 5, 0, 0, 1, -1), ConfigError);
}

TEST_CASE("node index bijection") {
  RegularGrid g = build_grid(7, 5, -1, 2, 3, 4);
  std::vector<char> seen(g.num_nodes(), 0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int k = g.node_index(i, j);
      REQUIRE(k >= 0);
      REQUIRE(k < g.num_nodes());
      CHECK(!seen[k]);
      seen[k] = 1;
    }
  }
}

TEST_CASE("evaluate: bilinear interpolation") {
  RegularGrid g = build_grid(11, 11, 0, 0, 1, 1);
  NodalField c(g, 3.25);
  CHECK(evaluate(c, 0.37, 0.81) == doctest::Approx(3.25));

  NodalField xf = make_field(g, [](double x, double) { return x; });
  CHECK(evaluate(xf, 0.3, 0.77) == doctest::Approx(0.3).epsilon(1e-13));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1, 1);
  NodalField rf(g);
  for (double& v : rf.values) v = dist(rng);
  CHECK(evaluate(rf, g.node_x(4), g.node_y(9)) == rf.at(4, 9));

  CHECK_THROWS_AS(evaluate(c, -0.1, 0.5), ConfigError);
  CHECK_THROWS_AS(evaluate(c, 0.5, 1.2), ConfigError);
}

TEST_CASE("gradient_at") {
  RegularGrid g = build_grid(21, 21, 0, 0, 1, 1);
  NodalField c(g, 2.0);
  auto gc = gradient_at(c, 0.4, 0.6);
  CHECK(gc[0] == doctest::Approx(0.0));
  CHECK(gc[1] == doctest::Approx(0.0));

  NodalField lin =
      make_field(g, [](double x, double y) { return 2 * x + 3 * y; });
  auto gl = gradient_at(lin, 0.31, 0.62);
  CHECK(gl[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gl[1] == doctest::Approx(3.0).epsilon(1e-12));

  // x^2 mid-domain: error is O(h^2); check the observed order across a
  // refinement
  auto gradient_error = [](int n) {
    RegularGrid gr = build_grid(n, n, 0, 0, 1, 1);
    NodalField f = make_field(gr, [](double x, double) { return x * x; });
    // keep the sample point fixed, off-node, mid-domain
    double x = 0.52341, y = 0.5012;
    return std::abs(gradient_at(f, x, y)[0] - 2 * x);
  };
  // central differences are exact for x^2 at nodes; the remaining error is
  // interpolation of the (linear) derivative field, also exact. Perturb with
  // a cubic to get a genuine O(h^2) error.
  auto cubic_error = [](int n) {
    RegularGrid gr = build_grid(n, n, 0, 0, 1, 1);
    NodalField f = make_field(gr, [](double x, double) { return x * x * x; });
    double x = 0.5, y = 0.5;  // node of both grids
    return std::abs(gradient_at(f, x, y)[0] - 3 * x * x);
  };
  (void)gradient_error;
  double e1 = cubic_error(17);
  double e2 = cubic_error(33);
  double order = std::log2(e1 / e2);
  CHECK(order >= 1.9);
}

TEST_CASE("delta_load") {
  RegularGrid g = build_grid(9, 9, 0, 0, 2, 2);
  SUBCASE("at a node: unit vector") {
    auto b = delta_load(g, g.node_x(3), g.node_y(5));
    for (int k = 0; k < g.num_nodes(); ++k) {
      if (k == g.node_index(3, 5)) {
        CHECK(b[k] == doctest::Approx(1.0));
      } else {
        CHECK(b[k] == 0.0);
      }
    }
  }
  SUBCASE("cell center: four quarters") {
    double x = 0.5 * (g.node_x(2) + g.node_x(3));
    double y = 0.5 * (g.node_y(6) + g.node_y(7));
    auto b = delta_load(g, x, y);
    CHECK(b[g.node_index(2, 6)] == doctest::Approx(0.25));
    CHECK(b[g.node_index(3, 6)] == doctest::Approx(0.25));
    CHECK(b[g.node_index(2, 7)] == doctest::Approx(0.25));
    CHECK(b[g.node_index(3, 7)] == doctest::Approx(0.25));
  }
  SUBCASE("partition of unity at random points") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(0, 2);
    for (int t = 0; t < 50; ++t) {
      auto b = delta_load(g, dist(rng), dist(rng));
      double sum = 0;
      for (double v : b) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("outside the domain") {
    CHECK_THROWS_AS(delta_load(g, -0.5, 1.0), ConfigError);
  }
}

TEST_CASE("assemble_system: null space, preconditions, mass total") {
  RegularGrid g = build_grid(17, 13, 0, 0, 1, 1);

  SUBCASE("constants in the null space of the pure stiffness operator") {
    NodalField D(g, 1.0), mu(g, 0.0);
    SparseSystem A = assemble_system(g, D, mu, 0.0);
    std::vector<double> ones(g.num_nodes(), 1.0), out(g.num_nodes());
    A.multiply(ones, out);
    for (double v : out) CHECK(std::abs(v) < 1e-12);
  }

  SUBCASE("nonpositive D rejected") {
    NodalField D(g, 0.0), mu(g, 0.0);
    CHECK_THROWS_AS(assemble_system(g, D, mu, 0.0), ConfigError);
  }

  SUBCASE("grid mismatch rejected") {
    RegularGrid other = build_grid(5, 5, 0, 0, 1, 1);
    NodalField D(other, 1.0), mu(g, 0.0);
    CHECK_THROWS_AS(assemble_system(g, D, mu, 0.0), ConfigError);
  }

  SUBCASE("entry sum equals the mass integral for D=1, mu=1, gamma=0") {
    // 1^T A 1 = mass total = area since the constant vector annihilates the
    // stiffness part
    NodalField D(g, 1.0), mu(g, 1.0);
    SparseSystem A = assemble_system(g, D, mu, 0.0);
    double sum = 0;
    for (double v : A.vals) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("assemble_system: exact symmetry and positive definiteness") {
  RegularGrid g = build_grid(12, 9, 0, 0, 2, 1.5);
  NodalField D = make_field(
      g, [](double x, double y) { return 0.03 * (1 + 0.3 * std::sin(x + y)); });
  NodalField mu = make_field(
      g, [](double x, double y) { return 0.02 * (1 + 0.5 * std::cos(x - y)); });
  SparseSystem A = assemble_system(g, D, mu, 0.431);

  double max_abs = 0;
  for (double v : A.vals) max_abs = std::max(max_abs, std::abs(v));
  for (int r = 0; r < A.n; ++r) {
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      int c = A.cols[k];
      CHECK(std::abs(A.vals[k] - A.entry(c, r)) <= 1e-12 * max_abs);
    }
  }

  std::mt19937 rng(3);
  std::normal_distribution<double> dist;
  std::vector<double> x(A.n), y(A.n);
  for (int t = 0; t < 10; ++t) {
    for (double& v : x) v = dist(rng);
    A.multiply(x, y);
    double q = 0;
    for (int k = 0; k < A.n; ++k) q += x[k] * y[k];
    CHECK(q > 0.0);
  }
}

TEST_CASE("assemble_rhs_volume") {
  SUBCASE("zero and unit fields") {
    RegularGrid g = build_grid(9, 7, 0, 0, 1, 1);
    NodalField zero(g, 0.0);
    for (double v : assemble_rhs_volume(g, zero)) CHECK(v == 0.0);

    NodalField one(g, 1.0);
    auto b = assemble_rhs_volume(g, one);
    double sum = 0;
    for (double v : b) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));  // area of [0,1]^2
  }

  SUBCASE("hat at the center of a 3x3 grid: tensor-product mass integrals") {
    // oracle: 1D exact integrals for linear hats with h = 1/2 give
    // self = 2h/3 and neighbor = h/6; the 2D loads are their products
    RegularGrid g = build_grid(3, 3, 0, 0, 1, 1);
    NodalField hat(g, 0.0);
    hat.at(1, 1) = 1.0;
    auto b = assemble_rhs_volume(g, hat);
    const double self1 = 2.0 * 0.5 / 3.0;
    const double adj1 = 0.5 / 6.0;
    CHECK(b[g.node_index(1, 1)] == doctest::Approx(self1 * self1));
    CHECK(b[g.node_index(0, 1)] == doctest::Approx(self1 * adj1));
    CHECK(b[g.node_index(2, 1)] == doctest::Approx(self1 * adj1));
    CHECK(b[g.node_index(1, 0)] == doctest::Approx(self1 * adj1));
    CHECK(b[g.node_index(1, 2)] == doctest::Approx(self1 * adj1));
    CHECK(b[g.node_index(0, 0)] == doctest::Approx(adj1 * adj1));
    CHECK(b[g.node_index(2, 2)] == doctest::Approx(adj1 * adj1));
  }

  SUBCASE("linearity to machine precision") {
    RegularGrid g = build_grid(8, 6, 0, 0, 2, 3);
    std::mt19937 rng(5);
    std::normal_distribution<double> dist;
    NodalField f(g), h(g), combo(g);
    for (int k = 0; k < g.num_nodes(); ++k) {
      f.values[k] = dist(rng);
      h.values[k] = dist(rng);
      combo.values[k] = 2.5 * f.values[k] - 1.25 * h.values[k];
    }
    auto bf = assemble_rhs_volume(g, f);
    auto bh = assemble_rhs_volume(g, h);
    auto bc = assemble_rhs_volume(g, combo);
    for (int k = 0; k < g.num_nodes(); ++k) {
      CHECK(bc[k] ==
            doctest::Approx(2.5 * bf[k] - 1.25 * bh[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("assemble_rhs_boundary") {
  RegularGrid g = build_grid(9, 11, 0, 0, 1, 1);

  SUBCASE("zero source") {
    auto b = assemble_rhs_boundary(g, [](double, double) { return 0.0; });
    for (double v : b) CHECK(v == 0.0);
  }

  SUBCASE("unit source: half the perimeter") {
    auto b = assemble_rhs_boundary(g, [](double, double) { return 1.0; });
    double sum = 0;
    for (double v : b) sum += v;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-13));
    // interior entries vanish
    for (int j = 1; j + 1 < g.ny; ++j) {
      for (int i = 1; i + 1 < g.nx; ++i) {
        CHECK(b[g.node_index(i, j)] == 0.0);
      }
    }
  }

  SUBCASE("left edge only: half the edge length") {
    auto b = assemble_rhs_boundary(
        g, [&](double x, double) { return x == g.x0 ? 1.0 : 0.0; });
    double sum = 0;
    for (double v : b) sum += v;
    CHECK(sum == doctest::Approx(0.5 * g.ly).epsilon(1e-13));
  }
}

TEST_CASE("integrate and l2_norm") {
  RegularGrid g = build_grid(33, 33, 0, 0, 2, 2);
  NodalField one(g, 1.0);
  CHECK(integrate(one) == doctest::Approx(4.0));
  CHECK(l2_norm(one) == doctest::Approx(2.0));
  NodalField lin = make_field(g, [](double x, double) { return x; });
  CHECK(integrate(lin) == doctest::Approx(4.0));  // mean x = 1 over area 4
}

namespace {

// Manufactured problem with smooth variable coefficients on [0,5]^2.
struct Manufactured {
  static double u(double x, double y) {
    return 1.5 + 0.4 * std::sin(0.8 * x + 0.3) * std::cos(0.6 * y - 0.4);
  }
  static double ux(double x, double y) {
    return 0.32 * std::cos(0.8 * x + 0.3) * std::cos(0.6 * y - 0.4);
  }
  static double uy(double x, double y) {
    return -0.24 * std::sin(0.8 * x + 0.3) * std::sin(0.6 * y - 0.4);
  }
  static double uxx(double x, double y) {
    return -0.256 * std::sin(0.8 * x + 0.3) * std::cos(0.6 * y - 0.4);
  }
  static double uyy(double x, double y) {
    return -0.144 * std::sin(0.8 * x + 0.3) * std::cos(0.6 * y - 0.4);
  }
  static double d(double x, double y) {
    return 0.03 * (1 + 0.25 * std::sin(0.5 * x) * std::sin(0.4 * y + 0.3));
  }
  static double dx(double x, double y) {
    return 0.00375 * std::cos(0.5 * x) * std::sin(0.4 * y + 0.3);
  }
  static double dy(double x, double y) {
    return 0.003 * std::sin(0.5 * x) * std::cos(0.4 * y + 0.3);
  }
  static double mu(double x, double y) {
    return 0.02 * (1 + 0.5 * std::cos(0.45 * x + 0.2) * std::cos(0.35 * y));
  }
  static double f(double x, double y) {
    return -(dx(x, y) * ux(x, y) + dy(x, y) * uy(x, y)) -
           d(x, y) * (uxx(x, y) + uyy(x, y)) + mu(x, y) * u(x, y);
  }
  static constexpr double gamma = 0.431;
  // Robin data 2 D du/dn + gamma u on the four edges of [0,5]^2
  static double s(double x, double y) {
    double n_du;
    if (x == 0.0) {
      n_du = -ux(x, y);
    } else if (x == 5.0) {
      n_du = ux(x, y);
    } else if (y == 0.0) {
      n_du = -uy(x, y);
    } else {
      n_du = uy(x, y);
    }
    return 2 * d(x, y) * n_du + gamma * u(x, y);
  }
};

}  // namespace

double manufactured_l2_error(int n) {
  RegularGrid g = build_grid(n, n, 0, 0, 5, 5);
  NodalField D = make_field(g, Manufactured::d);
  NodalField mu = make_field(g, Manufactured::mu);
  NodalField f = make_field(g, Manufactured::f);
  SparseSystem A = assemble_system(g, D, mu, Manufactured::gamma);
  std::vector<double> rhs = assemble_rhs_volume(g, f);
  std::vector<double> bdry = assemble_rhs_boundary(g, Manufactured::s);
  for (int k = 0; k < g.num_nodes(); ++k) rhs[k] += bdry[k];

  // solve tightly so the discretization error dominates
  CgOptions opts;
  opts.tol = 1e-12;
  auto [x, report] = solve_cg(A, rhs, opts);
  REQUIRE(report.converged);

  // 2x2 Gauss quadrature of (u_h - u*)^2
  double err2 = 0;
  const double q = 1.0 / std::sqrt(3.0);
  NodalField uh(g);
  uh.values = x;
  for (int cj = 0; cj + 1 < g.ny; ++cj) {
    for (int ci = 0; ci + 1 < g.nx; ++ci) {
      double xc = 0.5 * (g.node_x(ci) + g.node_x(ci + 1));
      double yc = 0.5 * (g.node_y(cj) + g.node_y(cj + 1));
      for (double gs : {-q, q}) {
        for (double gt : {-q, q}) {
          double xq = xc + 0.5 * g.hx() * gs;
          double yq = yc + 0.5 * g.hy() * gt;
          double diff = evaluate(uh, xq, yq) - Manufactured::u(xq, yq);
          err2 += 0.25 * g.hx() * g.hy() * diff * diff;
        }
      }
    }
  }
  return std::sqrt(err2);
}

TEST_CASE("manufactured-solution convergence (unit-scale grids)") {
  double e1 = manufactured_l2_error(17);
  double e2 = manufactured_l2_error(33);
  double e3 = manufactured_l2_error(65);
  double order12 = std::log2(e1 / e2);
  double order23 = std::log2(e2 / e3);
  CHECK(order12 >= 1.9);
  CHECK(order23 >= 1.9);
}
