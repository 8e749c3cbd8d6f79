#include <cmath>

#include "doctest.h"

#include "fracpot/geometry.hpp"
#include "fracpot/numerics.hpp"
#include "fracpot/rng.hpp"

using namespace fracpot;
using doctest::Approx;

namespace {

// Rejection check: no point of the certified ball B(x, r) leaves D.
bool ball_inside(const DomainSpec& D, const Point& x, double r, RngStream& rng, int samples) {
  const int d = x.dim();
  for (int i = 0; i < samples; ++i) {
    Point u(d);
    for (int k = 0; k < d; ++k) u[k] = rng.normal();
    u *= 1.0 / u.norm();
    for (double f : {0.25, 0.5, 0.75, 0.999})
      if (!contains(D, x + (f * r) * u)) return false;
  }
  return true;
}

DomainSpec half_ball() {
  return DomainSpec::intersection_of({DomainSpec::ball(Point{0.0, 0.0}, 1.0), DomainSpec::half_space(Point{1.0, 0.0}, 0.0)});
}

}  // namespace

TEST_CASE("membership is open") {
  const DomainSpec b = DomainSpec::ball(Point{0.0, 0.0}, 1.0);
  CHECK(contains(b, Point{0.5, 0.5}));
  CHECK_FALSE(contains(b, Point{1.0, 0.0}));
  const DomainSpec h = DomainSpec::half_space(Point{0.0, 1.0}, 0.5);
  CHECK(contains(h, Point{3.0, 0.6}));
  CHECK_FALSE(contains(h, Point{3.0, 0.5}));
  const DomainSpec t = DomainSpec::thorn(2, 2.0);
  CHECK(contains(t, Point{0.5, 0.2}));
  CHECK_FALSE(contains(t, Point{0.5, 0.3}));
  CHECK_FALSE(contains(t, Point{0.0, 0.0}));
  const DomainSpec c = DomainSpec::cusp(0.5);
  CHECK(contains(c, Point{0.0, 0.1}));
  CHECK_FALSE(contains(c, Point{0.25, 0.4}));
}

TEST_CASE("CSG composition") {
  const DomainSpec two = DomainSpec::union_of(
      {DomainSpec::ball(Point{-0.25, 0.0}, 0.2), DomainSpec::ball(Point{0.25, 0.0}, 0.2)});
  CHECK(contains(two, Point{0.3, 0.0}));
  CHECK_FALSE(contains(two, Point{0.0, 0.0}));
  const DomainSpec punctured = DomainSpec::difference(DomainSpec::ball(Point{0.0, 0.0}, 1.0),
                                                      DomainSpec::singleton(Point{0.0, 0.0}));
  CHECK_FALSE(contains(punctured, Point{0.0, 0.0}));
  CHECK(contains(punctured, Point{1e-9, 0.0}));
  CHECK(contains(half_ball(), Point{0.5, 0.0}));
  CHECK_FALSE(contains(half_ball(), Point{-0.5, 0.0}));
}

TEST_CASE("factory validation") {
  CHECK_THROWS_AS(DomainSpec::ball(Point{0.0}, -1.0), DomainError);
  CHECK_THROWS_AS(DomainSpec::half_space(Point{2.0, 0.0}, 0.0), DomainError);
  CHECK_THROWS_AS(DomainSpec::thorn(2, 2.0, 1.5), DomainError);
  CHECK_THROWS_AS(DomainSpec::thorn(1, 2.0), DomainError);
  CHECK_THROWS_AS(DomainSpec::union_of({DomainSpec::ball(Point{0.0}, 1.0), DomainSpec::ball(Point{0.0, 0.0}, 1.0)}),
                  DomainError);
  CHECK_THROWS_AS(DomainSpec::difference(DomainSpec::space(2), DomainSpec::thorn(2, 2.0)), DomainError);
}

TEST_CASE("inradius bounds are exact for balls and half-spaces") {
  const DomainSpec b = DomainSpec::ball(Point{1.0, 0.0}, 2.0);
  const InradiusBound r = dist_lower_bound(b, Point{1.5, 0.0});
  CHECK(r.radius == Approx(1.5).epsilon(1e-15));
  CHECK(r.exact);
  CHECK(dist_lower_bound(DomainSpec::half_space(Point{1.0, 0.0}, 0.0), Point{0.3, 7.0}).radius ==
        Approx(0.3).epsilon(1e-15));
  CHECK(std::isinf(dist_lower_bound(DomainSpec::space(3), Point{0.0, 0.0, 0.0}).radius));
  CHECK_THROWS_AS(dist_lower_bound(b, Point{5.0, 0.0}), DomainError);
}

TEST_CASE("inradius bounds are certified inside composite domains") {
  RngStream rng(7, 0);
  const DomainSpec thorn = DomainSpec::thorn(2, 2.0);
  const InradiusBound t = dist_lower_bound(thorn, Point{0.5, 0.0});
  CHECK(t.radius > 0.0);
  CHECK(t.radius <= 0.25);
  CHECK(ball_inside(thorn, Point{0.5, 0.0}, t.radius, rng, 2000));

  const DomainSpec thorn3 = DomainSpec::thorn(3, 1.5, 1.0, 0.7);
  const Point x3{0.6, 0.1, 0.05};
  REQUIRE(contains(thorn3, x3));
  CHECK(ball_inside(thorn3, x3, dist_lower_bound(thorn3, x3).radius, rng, 2000));

  const DomainSpec cusp = DomainSpec::cusp(0.5);
  const Point xc{0.1, 0.8};
  CHECK(ball_inside(cusp, xc, dist_lower_bound(cusp, xc).radius, rng, 2000));

  const DomainSpec hb = half_ball();
  CHECK(dist_lower_bound(hb, Point{0.2, 0.1}).radius == Approx(0.2).epsilon(1e-14));

  const DomainSpec annulus = DomainSpec::difference(DomainSpec::ball(Point{0.0, 0.0}, 1.0),
                                                    DomainSpec::ball(Point{0.0, 0.0}, 0.5));
  CHECK(dist_lower_bound(annulus, Point{0.7, 0.0}).radius == Approx(0.2).epsilon(1e-14));
}

TEST_CASE("exterior distance and bounding balls") {
  const DomainSpec b = DomainSpec::ball(Point{0.0, 0.0}, 1.0);
  CHECK(exterior_distance_lower_bound(b, Point{2.0, 0.0}) == Approx(1.0).epsilon(1e-15));
  CHECK(exterior_distance_lower_bound(b, Point{1.0, 0.0}) == 0.0);
  const auto bb = bounding_ball(half_ball());
  REQUIRE(bb);
  CHECK(bb->radius >= 1.0 - 1e-15);
  CHECK_FALSE(bounding_ball(DomainSpec::half_space(Point{1.0, 0.0}, 0.0)));
  const auto tb = bounding_ball(DomainSpec::thorn(2, 2.0));
  REQUIRE(tb);
  CHECK(contains(DomainSpec::ball(*tb), Point{0.999, 0.99}));
}

TEST_CASE("boundary projection lands on the boundary") {
  const DomainSpec b = DomainSpec::ball(Point{0.0, 0.0}, 1.0);
  const Point y = project_to_boundary(b, Point{0.999, 0.0});
  CHECK(y.norm() == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scaling and translation of domains") {
  const DomainSpec hb = half_ball();
  const DomainSpec k = scale_domain(hb, 2.0);
  CHECK(contains(k, Point{1.5, 0.0}));
  CHECK_FALSE(contains(k, Point{-0.1, 0.0}));
  const DomainSpec t = translate_domain(hb, Point{1.0, 1.0});
  CHECK(contains(t, Point{1.5, 1.0}));
  CHECK_FALSE(contains(t, Point{0.5, 1.0}));
  // kD_f = D_{k f(./k)}: membership is preserved pointwise.
  const DomainSpec thorn = DomainSpec::thorn(2, 2.0, 0.5);
  const DomainSpec kt = scale_domain(thorn, 2.0);
  for (const Point& x : {Point{0.3, 0.05}, Point{0.3, 0.1}, Point{0.45, 0.2}})
    CHECK(contains(kt, 2.0 * x) == contains(thorn, x));
  CHECK_THROWS_AS(translate_domain(thorn, Point{1.0, 0.0}), Unsupported);
}

TEST_CASE("inversion") {
  const ExtendedPoint t = invert_point(Point{2.0, 0.0});
  REQUIRE_FALSE(t.is_infinity());
  CHECK(t.finite()[0] == Approx(0.5).epsilon(1e-15));
  CHECK(invert_point(Point{0.0, 0.0}).is_infinity());
  CHECK(invert_point(ExtendedPoint::infinity(), 2).finite() == Point{0.0, 0.0});
  // The image of B((3,0),1) is B((3/8,0),1/8).
  const BallSpec ib = invert_ball(BallSpec(Point{3.0, 0.0}, 1.0));
  CHECK(ib.center[0] == Approx(0.375).epsilon(1e-15));
  CHECK(ib.radius == Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(invert_ball(BallSpec(Point{0.5, 0.0}, 1.0)), DomainError);
}
