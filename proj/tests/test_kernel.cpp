#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pesim/kernel.hpp"

using pesim::InfluenceKernelXd;

namespace {

// Largest |phi'| seen on a dense central-difference grid. Independent of the
// closed-form bound inside the kernel.
double numeric_slope_max(const InfluenceKernelXd& k, double r_hi) {
  const double h = 1e-6;
  double best = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double r = h + (r_hi - 2 * h) * double(i) / 20000.0;
    best = std::max(best, std::abs((k(r + h) - k(r - h)) / (2 * h)));
  }
  return best;
}

}  // namespace

TEST_CASE("constant kernel evaluates and has zero slope") {
  const auto k = InfluenceKernelXd::constant(0.75);
  CHECK(k(0.0) == 0.75);
  CHECK(k(3.7) == 0.75);
  CHECK(k.lipschitz_bound() == 0.0);
  CHECK(k.constant_value() == 0.75);
  CHECK_THROWS_AS(InfluenceKernelXd::constant(-0.1), std::invalid_argument);
}

TEST_CASE("piecewise linear kernel interpolates and extends") {
  const auto k = InfluenceKernelXd::piecewise_linear({0.0, 1.0, 2.0}, {1.0, 0.5, 0.25});
  CHECK(k(0.0) == 1.0);
  CHECK(k(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(k(1.0) == 0.5);
  CHECK(k(1.5) == doctest::Approx(0.375).epsilon(1e-15));
  // constant extension past the last knot
  CHECK(k(2.0) == 0.25);
  CHECK(k(17.0) == 0.25);
  // steepest segment has slope -0.5
  CHECK(k.lipschitz_bound() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(k.lipschitz_bound() >= numeric_slope_max(k, 3.0) - 1e-9);
}

TEST_CASE("piecewise linear kernel rejects malformed knots") {
  CHECK_THROWS_AS(InfluenceKernelXd::piecewise_linear({0.5, 1.0}, {1.0, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::piecewise_linear({0.0, 1.0, 1.0}, {1.0, 0.5, 0.25}),
                  std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::piecewise_linear({0.0, 1.0}, {1.0, -0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::piecewise_linear({0.0, 1.0}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::piecewise_linear({}, {}), std::invalid_argument);
}

TEST_CASE("rational decay evaluates at hand-checked points") {
  const auto k = InfluenceKernelXd::rational_decay(1.0, 1.0, 1.0);
  CHECK(k(0.0) == 1.0);
  CHECK(k(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(k(2.0) == doctest::Approx(0.2).epsilon(1e-15));

  const auto k2 = InfluenceKernelXd::rational_decay(1.0, 1.0, 2.0);
  CHECK(k2(1.0) == doctest::Approx(0.25).epsilon(1e-15));

  // generic (non-integer) exponent path
  const auto k15 = InfluenceKernelXd::rational_decay(1.0, 1.0, 1.5);
  CHECK(k15(1.0) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-15));
}

TEST_CASE("rational decay slope bound is the exact supremum") {
  // a (1+b r^2)^-p has max slope 2ap sqrt(b) / sqrt(2p+1) * ((2p+1)/(2p+2))^(p+1);
  // for a = b = p = 1 that is 2/sqrt(3) * (3/4)^2.
  const auto k = InfluenceKernelXd::rational_decay(1.0, 1.0, 1.0);
  const double exact = 2.0 / std::sqrt(3.0) * 0.5625;
  CHECK(k.lipschitz_bound() == doctest::Approx(exact).epsilon(1e-14));

  // the numeric grid maximum must never exceed the claimed bound, and the
  // bound must be attained somewhere on the grid
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.3, 1.0, 4.0})
      for (double p : {0.5, 1.0, 1.5, 2.0}) {
        const auto kk = InfluenceKernelXd::rational_decay(a, b, p);
        const double grid = numeric_slope_max(kk, 10.0 / std::sqrt(b));
        CHECK(grid <= kk.lipschitz_bound() * (1 + 1e-8) + 1e-12);
        CHECK(grid >= kk.lipschitz_bound() * (1 - 1e-4));
      }
}

TEST_CASE("flat rational decay has zero slope bound") {
  CHECK(InfluenceKernelXd::rational_decay(2.0, 0.0, 1.0).lipschitz_bound() == 0.0);
  CHECK(InfluenceKernelXd::rational_decay(2.0, 1.0, 0.0).lipschitz_bound() == 0.0);
  CHECK(InfluenceKernelXd::rational_decay(2.0, 0.0, 1.0)(5.0) == 2.0);
  CHECK(InfluenceKernelXd::rational_decay(2.0, 1.0, 0.0)(5.0) == 2.0);
}

TEST_CASE("rational decay rejects bad parameters") {
  CHECK_THROWS_AS(InfluenceKernelXd::rational_decay(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::rational_decay(-1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::rational_decay(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(InfluenceKernelXd::rational_decay(1.0, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("slope bound can be overridden") {
  auto k = InfluenceKernelXd::constant(1.0);
  k.set_lipschitz_bound(3.5);
  CHECK(k.lipschitz_bound() == 3.5);
}
