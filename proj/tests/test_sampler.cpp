#include <cmath>

#include "doctest.h"

#include "fracpot/geometry.hpp"
#include "fracpot/kernels.hpp"
#include "fracpot/sampler.hpp"

using namespace fracpot;
using doctest::Approx;

namespace {

WalkConfig workers(int w) {
  WalkConfig c;
  c.workers = w;
  return c;
}

bool same(const MCEstimate& a, const MCEstimate& b) {
  return a.mean == b.mean && a.std_error == b.std_error && a.n == b.n && a.censored_fraction == b.censored_fraction;
}

}  // namespace

TEST_CASE("unit sphere samples") {
  RngStream r(0, 0);
  for (int d = 1; d <= 4; ++d) {
    const StableParams p(d, 1.0);
    for (int i = 0; i < 100; ++i) CHECK(sample_unit_sphere(p, r).norm() == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("exit radius law") {
  const StableParams p(2, 1.0);
  RngStream r(0, 1);
  const int n = 100000;
  int beyond = 0;
  for (int i = 0; i < n; ++i) {
    const double R = sample_ball_exit_radius(p, r);
    REQUIRE(R > 1.0);
    if (R > 2.0) ++beyond;
  }
  const double sigma = std::sqrt(2.0 / 9.0 / n);
  CHECK(std::abs(static_cast<double>(beyond) / n - 1.0 / 3.0) < 4.0 * sigma);
  CHECK(1.0 - ball_exit_radius_cdf(p, 2.0) == Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(ball_exit_radius_cdf(p, 1.0) == 0.0);
}

TEST_CASE("walks start inside the domain") {
  const StableParams p(2, 1.0);
  const DomainSpec D = DomainSpec::ball(Point{0.0, 0.0}, 1.0);
  RngStream r(0, 0);
  CHECK_THROWS_AS(run_walk(p, D, Point{2.0, 0.0}, {}, r), DomainError);
  const WalkOutcome w = run_walk(p, D, Point{0.2, 0.1}, {}, r);
  CHECK_FALSE(contains(D, w.exit_point));
  CHECK(w.steps >= 1);
  CHECK(w.exit_time_sum > 0.0);
}

TEST_CASE("exit time from the center of a ball is exact") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const StableParams p(3, alpha);
    const MCEstimate e =
        estimate_exit_time(p, DomainSpec::ball(Point{0.0, 0.0, 0.0}, 1.0), Point{0.0, 0.0, 0.0}, 1000, {}, RngStream(0, 0));
    CHECK(e.mean == Approx(exit_time_const(p)).epsilon(1e-14));
    CHECK(e.std_error == 0.0);
    CHECK(e.healthy);
  }
}

TEST_CASE("exit time of a slab reduces to the interval") {
  // The first coordinate of the planar process is a one-dimensional stable
  // process, so s_slab(x) = s_{(0,1)}(x_1).
  const double alpha = 1.0;
  const StableParams p(2, alpha);
  const DomainSpec slab = DomainSpec::intersection_of(
      {DomainSpec::half_space(Point{1.0, 0.0}, 0.0), DomainSpec::half_space(Point{-1.0, 0.0}, -1.0)});
  const MCEstimate e = estimate_exit_time(p, slab, Point{0.3, 5.0}, 20000, {}, RngStream(0, 2));
  const double exact = ball_exit_time(StableParams(1, alpha), BallSpec(Point{0.5}, 0.5), Point{0.3});
  CHECK(e.healthy);
  CHECK(std::abs(e.mean - exact) < 4.0 * e.std_error);
}

TEST_CASE("results do not depend on the worker count") {
  const StableParams p(2, 1.0);
  const DomainSpec hb = DomainSpec::intersection_of(
      {DomainSpec::ball(Point{0.0, 0.0}, 1.0), DomainSpec::half_space(Point{1.0, 0.0}, 0.0)});
  const Point x{0.4, 0.1};
  const RngStream r(11, 0);
  const MCEstimate a = estimate_exit_time(p, hb, x, 3001, workers(1), r);
  const MCEstimate b = estimate_exit_time(p, hb, x, 3001, workers(3), r);
  const MCEstimate c = estimate_exit_time(p, hb, x, 3001, workers(8), r);
  CHECK(same(a, b));
  CHECK(same(a, c));
  auto payoff = [](const Point& y) { return y[0]; };
  CHECK(same(estimate_harmonic_expectation(p, hb, x, payoff, 2000, workers(1), r),
             estimate_harmonic_expectation(p, hb, x, payoff, 2000, workers(4), r)));
}

TEST_CASE("harmonic measure of the exterior of B_2 from the center") {
  const StableParams p(2, 1.0);
  auto far = [](const Point& y) { return y.norm() > 2.0 ? 1.0 : 0.0; };
  const MCEstimate e = estimate_harmonic_expectation(p, DomainSpec::ball(Point{0.0, 0.0}, 1.0), Point{0.0, 0.0}, far,
                                                     40000, {}, RngStream(0, 3));
  CHECK(std::abs(e.mean - 1.0 / 3.0) < 4.0 * e.std_error);
  const MCEstimate one = estimate_harmonic_expectation(p, DomainSpec::ball(Point{0.0, 0.0}, 1.0), Point{0.0, 0.0},
                                                       [](const Point&) { return 1.0; }, 1000, {}, RngStream(0, 3));
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);
}

TEST_CASE("Poisson kernel collision estimator") {
  const StableParams p(2, 1.0);
  const BallSpec b(Point{0.0, 0.0}, 1.0);
  const MCEstimate e =
      estimate_poisson_kernel(p, DomainSpec::ball(b), Point{0.3, 0.0}, Point{2.0, 0.0}, 20000, {}, RngStream(0, 4));
  CHECK(std::abs(e.mean - ball_poisson(p, b, Point{0.3, 0.0}, Point{2.0, 0.0})) < 4.0 * e.std_error);
  CHECK_THROWS_AS(estimate_poisson_kernel(p, DomainSpec::ball(b), Point{0.3, 0.0}, Point{1.0, 0.0}, 10, {},
                                          RngStream(0, 4)),
                  DomainError);
}

TEST_CASE("Green function estimator") {
  const StableParams p(2, 1.0);
  const BallSpec b(Point{0.0, 0.0}, 1.0);
  const Point x{0.3, 0.0}, v{-0.2, 0.4};
  const MCEstimate g = estimate_green(p, DomainSpec::ball(b), x, v, 100, {}, RngStream(0, 5));
  CHECK(g.mean == ball_green(p, b, x, v));
  CHECK(g.std_error == 0.0);
  // Domain monotonicity: G_D <= G_B for D inside B.
  const DomainSpec hb = DomainSpec::intersection_of(
      {DomainSpec::ball(b), DomainSpec::half_space(Point{1.0, 0.0}, 0.0)});
  const MCEstimate h = estimate_green(p, hb, Point{0.3, 0.1}, Point{0.6, -0.2}, 20000, {}, RngStream(0, 6));
  CHECK(h.mean > 0.0);
  CHECK(h.mean < ball_green(p, b, Point{0.3, 0.1}, Point{0.6, -0.2}));
  CHECK_THROWS_AS(estimate_green(p, DomainSpec::half_space(Point{1.0, 0.0}, 0.0), x, v, 10, {}, RngStream(0, 0)),
                  Unsupported);
}

TEST_CASE("Green ratio with x = x0 is exactly one") {
  const StableParams p(2, 1.0);
  const RatioEstimate r = estimate_green_ratio(p, DomainSpec::ball(Point{0.0, 0.0}, 1.0), Point{0.2, 0.2},
                                               Point{0.2, 0.2}, Point{0.0, 0.9}, 500, {}, RngStream(0, 7));
  CHECK(r.ratio == 1.0);
  CHECK(r.std_error == 0.0);
}

TEST_CASE("unbounded domains with infinite exit time are flagged") {
  // The Cauchy process leaves the half-line in finite but non-integrable time.
  const StableParams p(1, 1.0);
  const MCEstimate e =
      estimate_exit_time(p, DomainSpec::half_space(Point{1.0}, 0.0), Point{1.0}, 4000, {}, RngStream(0, 8));
  CHECK_FALSE(e.healthy);
}

TEST_CASE("direct and two-stage walks agree in distribution") {
  const StableParams p(2, 1.0);
  const DomainSpec D = DomainSpec::ball(Point{0.0, 0.0}, 1.0);
  const DomainSpec U = DomainSpec::ball(Point{0.1, 0.0}, 0.5);
  auto payoff = [](const Point& y) { return y[0]; };
  const WalkFunctionals a = estimate_walk_functionals(p, D, Point{0.3, 0.1}, payoff, 20000, {}, RngStream(1, 0));
  const WalkFunctionals b =
      estimate_walk_functionals_two_stage(p, D, U, Point{0.3, 0.1}, payoff, 20000, {}, RngStream(1, 1));
  const double se = std::hypot(a.harmonic.std_error, b.harmonic.std_error);
  CHECK(std::abs(a.harmonic.mean - b.harmonic.mean) < 4.0 * se);
  const double exact = ball_exit_time(p, BallSpec(Point{0.0, 0.0}, 1.0), Point{0.3, 0.1});
  CHECK(std::abs(b.exit_time.mean - exact) < 4.0 * b.exit_time.std_error);
}
