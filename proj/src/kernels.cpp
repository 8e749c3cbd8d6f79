#include "fracpot/kernels.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

std::atomic<double> g_poisson_perturbation{1.0};

void check_dim(const StableParams& p, const Point& x, const char* what) {
  if (x.dim() != p.d) throw DomainError(std::string(what) + ": point dimension does not match d");
}

// |Gamma(z)| for z in (-1, 0) U (0, inf).
double abs_gamma_log(double z) {
  if (z > 0.0) return ln_gamma(z);
  return ln_gamma(z + 1.0) - std::log(-z);
}

double log_beta(double a, double b) { return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b); }

// int_0^w s^{alpha/2-1} (1+s)^{-d/2} ds through sigma = s^{alpha/2}:
// (2/alpha) int_0^{w^{alpha/2}} (1 + sigma^{2/alpha})^{-d/2} d sigma.
double radial_green_integral_quad(const StableParams& p, double w, double rel_tol) {
  const double a = p.alpha;
  const double half_d = 0.5 * p.d;
  auto g = [a, half_d](double sigma) { return std::pow(1.0 + std::pow(sigma, 2.0 / a), -half_d); };
  const double upper = std::pow(w, 0.5 * a);
  auto integrate = [&](const Integrand& f, double lo, double hi) {
    const QuadResult coarse = adaptive_quad(f, lo, hi, 1e-6);
    return adaptive_quad(f, lo, hi, rel_tol * std::max(std::abs(coarse.value), 1e-300)).value;
  };
  double total = integrate(g, 0.0, std::min(1.0, upper));
  if (upper > 1.0) {
    auto g_log = [&g](double tau) {
      const double e = std::exp(tau);
      return e * g(e);
    };
    total += integrate(g_log, 0.0, std::log(upper));
  }
  return 2.0 / a * total;
}

struct Centered {
  Point x;
  Point v;
};

Centered recentre(const BallSpec& ball, const Point& x, const Point& v) {
  return {x - ball.center, v - ball.center};
}

}  // namespace

StableParams::StableParams(int dim, double a) : d(dim), alpha(a) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("StableParams: d must lie in [1, 8]");
  if (!(a > 0.0 && a < 2.0)) throw DomainError("StableParams: alpha must lie in (0, 2)");
}

BallSpec::BallSpec(Point c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("BallSpec: radius must be positive and finite");
  if (!c.is_finite()) throw DomainError("BallSpec: center must be finite");
}

double riesz_const(const StableParams& p, double gamma) {
  if (!(gamma > -2.0 && gamma < 2.0) || gamma == 0.0)
    throw DomainError("riesz_const: gamma must lie in (-2, 2) \\ {0}");
  const double lg = ln_gamma(0.5 * (p.d - gamma)) - gamma * std::log(2.0) - 0.5 * p.d * std::log(kPi) -
                    abs_gamma_log(0.5 * gamma);
  return std::exp(lg);
}

double levy_density(const StableParams& p, const Point& x, const Point& y) {
  check_dim(p, x, "levy_density");
  check_dim(p, y, "levy_density");
  const double r = distance(x, y);
  if (r == 0.0) return kInf;
  return riesz_const(p, -p.alpha) * std::pow(r, -p.d - p.alpha);
}

double poisson_const(const StableParams& p) {
  const double c =
      std::exp(ln_gamma(0.5 * p.d) - (1.0 + 0.5 * p.d) * std::log(kPi)) * std::sin(0.5 * kPi * p.alpha);
  return c * g_poisson_perturbation.load(std::memory_order_relaxed);
}

double green_const(const StableParams& p) {
  return std::exp(ln_gamma(0.5 * p.d) - p.alpha * std::log(2.0) - 0.5 * p.d * std::log(kPi) -
                  2.0 * ln_gamma(0.5 * p.alpha));
}

double exit_time_const(const StableParams& p) { return poisson_const(p) / riesz_const(p, -p.alpha); }

double ball_poisson(const StableParams& p, const BallSpec& ball, const Point& x, const Point& y) {
  check_dim(p, x, "ball_poisson");
  check_dim(p, y, "ball_poisson");
  const double r2 = ball.radius * ball.radius;
  const double x2 = (x - ball.center).norm2();
  const double y2 = (y - ball.center).norm2();
  if (!(x2 < r2)) throw DomainError("ball_poisson: x must lie in the open ball");
  if (y2 < r2) throw DomainError("ball_poisson: y must lie outside the open ball");
  if (y2 == r2) return kInf;
  return poisson_const(p) * std::pow((r2 - x2) / (y2 - r2), 0.5 * p.alpha) * std::pow(distance(x, y), -p.d);
}

double ball_green(const StableParams& p, const BallSpec& ball, const Point& x, const Point& v) {
  check_dim(p, x, "ball_green");
  check_dim(p, v, "ball_green");
  const auto [xc, vc] = recentre(ball, x, v);
  const double r2 = ball.radius * ball.radius;
  const double hx = r2 - xc.norm2();
  const double hv = r2 - vc.norm2();
  if (!(hx > 0.0) || !(hv > 0.0)) return 0.0;
  const double dist2 = (xc - vc).norm2();
  const double a = 0.5 * p.alpha;
  if (dist2 == 0.0) {
    if (p.alpha <= p.d) return kInf;
    // alpha > d = 1: the |x-v|^{alpha-1} factor cancels the growth of the integral.
    return green_const(p) * 2.0 / (p.alpha - 1.0) * std::pow(hx / ball.radius, p.alpha - 1.0);
  }
  // The r^2 in the denominator keeps w dimensionless (scaling G_{kB}(kx,kv) = k^{alpha-d} G_B(x,v)).
  const double w = hx * hv / (r2 * dist2);
  double integral;
  if (p.alpha < p.d) {
    const double b = 0.5 * (p.d - p.alpha);
    integral = std::exp(log_beta(a, b)) * reg_inc_beta(w / (1.0 + w), a, b);
  } else {
    integral = radial_green_integral_quad(p, w, 1e-13);
  }
  return green_const(p) * std::pow(dist2, 0.5 * (p.alpha - p.d)) * integral;
}

double ball_green_quadrature(const StableParams& p, const BallSpec& ball, const Point& x, const Point& v,
                             double tol) {
  check_dim(p, x, "ball_green_quadrature");
  check_dim(p, v, "ball_green_quadrature");
  const auto [xc, vc] = recentre(ball, x, v);
  const double r2 = ball.radius * ball.radius;
  const double hx = r2 - xc.norm2();
  const double hv = r2 - vc.norm2();
  if (!(hx > 0.0) || !(hv > 0.0)) return 0.0;
  const double dist2 = (xc - vc).norm2();
  if (dist2 == 0.0) return ball_green(p, ball, x, v);
  const double w = hx * hv / (r2 * dist2);
  return green_const(p) * std::pow(dist2, 0.5 * (p.alpha - p.d)) * radial_green_integral_quad(p, w, tol);
}

double ball_exit_time(const StableParams& p, const BallSpec& ball, const Point& x) {
  check_dim(p, x, "ball_exit_time");
  const double h = ball.radius * ball.radius - (x - ball.center).norm2();
  if (!(h > 0.0)) return 0.0;
  return exit_time_const(p) * std::pow(h, 0.5 * p.alpha);
}

double ball_martin(const StableParams& p, double r, const Point& x, const Point& y) {
  check_dim(p, x, "ball_martin");
  check_dim(p, y, "ball_martin");
  if (!(r > 0.0)) throw DomainError("ball_martin: radius must be positive");
  if (std::abs(y.norm() - r) > 1e-9 * r) throw DomainError("ball_martin: y must lie on the sphere |y| = r");
  const double h = r * r - x.norm2();
  if (!(h > 0.0)) throw DomainError("ball_martin: x must lie in the open ball");
  return std::pow(r, p.d - p.alpha) * std::pow(h, 0.5 * p.alpha) / std::pow(distance(x, y), p.d);
}

double riesz_kernel(const StableParams& p, const Point& x, const Point& y) {
  check_dim(p, x, "riesz_kernel");
  check_dim(p, y, "riesz_kernel");
  if (!(p.alpha < p.d)) throw Unsupported("riesz_kernel: the whole space is Greenian in this form only for alpha < d");
  const double r = distance(x, y);
  if (r == 0.0) return kInf;
  return riesz_const(p, p.alpha) * std::pow(r, p.alpha - p.d);
}

namespace testing {
void set_poisson_const_perturbation(double factor) { g_poisson_perturbation.store(factor); }
double poisson_const_perturbation() { return g_poisson_perturbation.load(); }
}  // namespace testing

}  // namespace fracpot
