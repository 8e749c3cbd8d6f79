#include <cmath>
#include <numbers>

#include "doctest.h"

#include "fracpot/kernels.hpp"
#include "fracpot/numerics.hpp"

using namespace fracpot;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("stable parameters are validated") {
  CHECK_THROWS_AS(StableParams(0, 1.0), DomainError);
  CHECK_THROWS_AS(StableParams(2, 0.0), DomainError);
  CHECK_THROWS_AS(StableParams(2, 2.0), DomainError);
  CHECK_NOTHROW(StableParams(8, 1.99));
}

TEST_CASE("constants for the Cauchy process on the line") {
  const StableParams p(1, 1.0);
  // Jump density 1 / (pi |y - x|^2), Poisson constant 1 / pi, E tau_{B_1} = 1.
  CHECK(riesz_const(p, -1.0) == Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(levy_density(p, Point{0.0}, Point{2.0}) == Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));
  CHECK(poisson_const(p) == Approx(1.0 / kPi).epsilon(1e-14));
  CHECK(exit_time_const(p) == Approx(1.0).epsilon(1e-14));
  CHECK(std::isinf(levy_density(p, Point{0.5}, Point{0.5})));
}

TEST_CASE("Brownian limit of the exit-time constant") {
  // alpha -> 2: the generator tends to Delta, whose ball exit time is (1 - |x|^2) / (2d).
  for (int d = 1; d <= 3; ++d)
    CHECK(exit_time_const(StableParams(d, 1.999999)) == Approx(0.5 / d).epsilon(1e-4));
}

TEST_CASE("ball Poisson kernel integrates to one off-center (d = 1)") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const StableParams p(1, alpha);
    const BallSpec b(Point{0.0}, 1.0);
    const double x = 0.3;
    const double a = 0.5 * alpha, q = 1.0 / (1.0 - a), delta = 1e-7;
    double mass = 0.0;
    for (double side : {1.0, -1.0}) {
      auto f = [&](double y) { return ball_poisson(p, b, Point{x}, Point{side * y}); };
      // Sliver (1, 1 + delta) at leading order: C (1 - x^2)^a (2u)^{-a} / |1 - side x|.
      mass += poisson_const(p) * std::pow(1.0 - x * x, a) * std::pow(2.0, -a) * std::pow(delta, 1.0 - a) / (1.0 - a) /
              std::abs(1.0 - side * x);
      // y = 1 + delta + t^q flattens the (y - 1)^{-a} edge.
      auto g = [&](double t) { return f(1.0 + delta + std::pow(t, q)) * q * std::pow(t, q - 1.0); };
      mass += adaptive_quad(g, 0.0, std::pow(1.0 - delta, 1.0 / q), 1e-12).value;
      mass += adaptive_quad_to_infinity(f, 2.0, 1e-12).value;
    }
    CHECK(mass == Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("ball Poisson kernel preconditions") {
  const StableParams p(2, 1.0);
  const BallSpec b(Point{0.0, 0.0}, 1.0);
  CHECK_THROWS_AS(ball_poisson(p, b, Point{1.5, 0.0}, Point{2.0, 0.0}), DomainError);
  CHECK_THROWS_AS(ball_poisson(p, b, Point{0.0, 0.0}, Point{0.5, 0.0}), DomainError);
  CHECK(std::isinf(ball_poisson(p, b, Point{0.0, 0.0}, Point{1.0, 0.0})));
}

TEST_CASE("ball Green function: special-function and quadrature paths agree") {
  for (int d = 1; d <= 3; ++d)
    for (double alpha : {0.5, 1.0, 1.5}) {
      const StableParams p(d, alpha);
      const BallSpec b(Point::axis(d, 0, 0.2), 1.7);
      Point x = Point::axis(d, 0, 0.5), v = Point::axis(d, 0, -0.9);
      if (d > 1) v[1] = 0.4;
      CHECK(ball_green(p, b, x, v) == Approx(ball_green_quadrature(p, b, x, v)).epsilon(1e-10));
      CHECK(ball_green(p, b, x, v) == Approx(ball_green(p, b, v, x)).epsilon(1e-14));
    }
}

TEST_CASE("ball Green function scales with the radius") {
  // G_{kB}(kx, kv) = k^{alpha-d} G_B(x, v); fails if the r^2 in w is dropped.
  for (double alpha : {0.5, 1.0, 1.5}) {
    const StableParams p(2, alpha);
    const BallSpec b(Point{0.0, 0.0}, 1.0), b3(Point{0.0, 0.0}, 3.0);
    const Point x{0.3, 0.1}, v{-0.4, 0.5};
    CHECK(ball_green(p, b3, 3.0 * x, 3.0 * v) == Approx(std::pow(3.0, alpha - 2.0) * ball_green(p, b, x, v)).epsilon(1e-13));
  }
}

TEST_CASE("ball Green function vanishes outside and matches the Riesz kernel near the pole") {
  const StableParams p(3, 1.0);
  const BallSpec b(Point{0.0, 0.0, 0.0}, 1.0);
  CHECK(ball_green(p, b, Point{0.0, 0.0, 0.0}, Point{1.2, 0.0, 0.0}) == 0.0);
  const Point x{0.1, 0.0, 0.0}, v{0.1 + 1e-6, 0.0, 0.0};
  CHECK(ball_green(p, b, x, v) / riesz_kernel(p, x, v) == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("exit time is the integral of the Green function (d = 1)") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const StableParams p(1, alpha);
    const BallSpec b(Point{0.5}, 2.0);
    const double x = 1.2;
    // v = x -+ t^2 tames the |x - v|^{alpha - 1} pole (G is infinite on the diagonal for alpha <= 1).
    // Nodes with x -+ t^2 == x in floating point sit on the diagonal and carry no mass.
    auto term = [&](double v, double t) { return v == x ? 0.0 : 2.0 * t * ball_green(p, b, Point{x}, Point{v}); };
    auto left = [&](double t) { return term(x - t * t, t); };
    auto right = [&](double t) { return term(x + t * t, t); };
    const double s = adaptive_quad(left, 0.0, std::sqrt(x + 1.5), 1e-12).value +
                     adaptive_quad(right, 0.0, std::sqrt(2.5 - x), 1e-12).value;
    CHECK(s == Approx(ball_exit_time(p, b, Point{x})).epsilon(1e-7));
  }
}

TEST_CASE("diagonal of the Green function for alpha > d = 1") {
  const StableParams p(1, 1.5);
  const BallSpec b(Point{0.0}, 2.0);
  const double diag = ball_green(p, b, Point{0.3}, Point{0.3});
  CHECK(std::isfinite(diag));
  // G(x, v) = G(x, x) - O(|x - v|^{alpha - 1}).
  CHECK(diag == Approx(ball_green(p, b, Point{0.3}, Point{0.3 + 1e-12})).epsilon(1e-5));
}

TEST_CASE("exit time closed form") {
  const StableParams p(2, 1.0);
  const BallSpec b(Point{1.0, 1.0}, 2.0);
  CHECK(ball_exit_time(p, b, Point{1.0, 1.0}) == Approx(exit_time_const(p) * 2.0).epsilon(1e-14));
  CHECK(ball_exit_time(p, b, Point{5.0, 1.0}) == 0.0);
}

TEST_CASE("ball Martin kernel") {
  const StableParams p(2, 1.0);
  CHECK(ball_martin(p, 1.0, Point{0.5, 0.0}, Point{1.0, 0.0}) == Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));
  CHECK(ball_martin(p, 1.0, Point{0.0, 0.0}, Point{0.0, 1.0}) == Approx(1.0).epsilon(1e-14));
  // Limit of Green-function ratios toward the boundary point.
  const BallSpec b(Point{0.0, 0.0}, 1.0);
  const Point x{0.5, 0.0}, v{1.0 - 1e-7, 0.0};
  CHECK(ball_green(p, b, x, v) / ball_green(p, b, Point{0.0, 0.0}, v) == Approx(2.0 * std::sqrt(3.0)).epsilon(1e-5));
}

TEST_CASE("Poisson constant perturbation hook") {
  const StableParams p(2, 1.0);
  const double c = poisson_const(p);
  testing::set_poisson_const_perturbation(1.01);
  CHECK(poisson_const(p) == Approx(1.01 * c).epsilon(1e-15));
  testing::set_poisson_const_perturbation(1.0);
  CHECK(poisson_const(p) == c);
}
