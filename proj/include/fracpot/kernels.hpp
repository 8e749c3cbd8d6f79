#pragma once

#include "fracpot/numerics.hpp"
#include "fracpot/point.hpp"

namespace fracpot {

/// Dimension d and stability index alpha of the isotropic alpha-stable process.
struct StableParams {
  int d = 1;
  double alpha = 1.0;

  StableParams() = default;
  StableParams(int dim, double a);
};

struct BallSpec {
  Point center;
  double radius = 1.0;

  BallSpec() = default;
  BallSpec(Point c, double r);
};

/// Riesz constant A_{d,gamma} = Gamma((d-gamma)/2) / (2^gamma pi^{d/2} |Gamma(gamma/2)|),
/// -2 < gamma < 2, gamma != 0.
double riesz_const(const StableParams& p, double gamma);

/// Jump intensity nu(x, y) = A_{d,-alpha} |y-x|^{-d-alpha}; +inf on the diagonal.
double levy_density(const StableParams& p, const Point& x, const Point& y);

/// C_{d,alpha} = Gamma(d/2) pi^{-1-d/2} sin(pi alpha / 2).
double poisson_const(const StableParams& p);

/// B_{d,alpha} = Gamma(d/2) / (2^alpha pi^{d/2} Gamma(alpha/2)^2).
double green_const(const StableParams& p);

/// C_{d,alpha} / A_{d,-alpha}: expected exit time from the unit ball started at its center.
double exit_time_const(const StableParams& p);

/// Density at y of the exit position from `ball` started at x.
/// Throws unless x is in the open ball and y outside the open ball;
/// returns +inf for y on the sphere.
double ball_poisson(const StableParams& p, const BallSpec& ball, const Point& x, const Point& y);

/// Green function of the ball through the incomplete beta function.
/// Zero when either argument lies outside the open ball.
double ball_green(const StableParams& p, const BallSpec& ball, const Point& x, const Point& v);

/// Same value computed by direct quadrature of the radial integral. Independent
/// of ball_green's special-function path; used to cross-check it.
double ball_green_quadrature(const StableParams& p, const BallSpec& ball, const Point& x, const Point& v,
                             double tol = 1e-13);

/// Expected exit time from the ball started at x; zero outside the closed ball.
double ball_exit_time(const StableParams& p, const BallSpec& ball, const Point& x);

/// Martin kernel of B(0, r) with reference point 0, for |x| < r and |y| = r.
double ball_martin(const StableParams& p, double r, const Point& x, const Point& y);

/// Green function of the whole space (alpha < d): A_{d,alpha} |y-x|^{alpha-d}.
double riesz_kernel(const StableParams& p, const Point& x, const Point& y);

namespace testing {
/// Multiplies C_{d,alpha} by `factor` for mutation-style self checks. Process-wide.
void set_poisson_const_perturbation(double factor);
double poisson_const_perturbation();
}  // namespace testing

}  // namespace fracpot
