#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "fracpot/geometry.hpp"
#include "fracpot/kernels.hpp"
#include "fracpot/rng.hpp"

namespace fracpot {

struct WalkConfig {
  double shrink = 1.0;
  std::uint64_t max_steps = 1'000'000;
  double min_radius = 1e-12;
  // Worker threads for estimators; 0 means the available hardware parallelism.
  // Results do not depend on this value.
  int workers = 0;
};

struct WalkOutcome {
  Point exit_point;     // first position outside D, or the last interior position if censored
  Point last_interior;  // center of the last ball
  std::uint64_t steps = 0;
  double exit_time_sum = 0.0;
  bool censored = false;
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  double censored_fraction = 0.0;
  bool healthy = true;
  bool possibly_infinite = false;
  std::string note;
};

/// Estimates whose censored fraction exceeds this are flagged unhealthy.
inline constexpr double kCensoredCeiling = 1e-3;

/// A walk whose inscribed radius exceeds this has escaped to infinity: it is
/// censored and its exit-time sum is +inf (transient escape on unbounded D).
inline constexpr double kEscapeRadius = 1e100;

using Payoff = std::function<double(const Point&)>;

Point sample_unit_sphere(const StableParams& p, RngStream& rng);

/// Distance from the center, in units of the radius, at which the process
/// started at the center of a ball first lands outside it: R^{-2} ~ Beta(alpha/2, 1 - alpha/2).
double sample_ball_exit_radius(const StableParams& p, RngStream& rng);

/// First position outside `ball` of the process started at its center.
Point sample_ball_exit(const StableParams& p, const BallSpec& ball, RngStream& rng);

/// CDF of sample_ball_exit_radius: P(R <= r) = 1 - I_{r^{-2}}(alpha/2, 1 - alpha/2).
double ball_exit_radius_cdf(const StableParams& p, double r);

namespace detail {

/// Walk-on-spheres loop. `on_ball(center, radius)` is called for every ball
/// visited, before the jump out of it.
template <class OnBall>
WalkOutcome walk(const StableParams& p, const DomainSpec& D, const Point& x, const WalkConfig& cfg, RngStream& rng,
                 OnBall&& on_ball) {
  const double kappa = exit_time_const(p);
  WalkOutcome out;
  Point cur = x;
  for (;;) {
    out.last_interior = cur;
    if (out.steps >= cfg.max_steps) {
      out.censored = true;
      out.exit_point = cur;
      return out;
    }
    const double r = cfg.shrink * dist_lower_bound(D, cur).radius;
    if (!(r <= kEscapeRadius)) {
      // No boundary in reach, or the walk has run off to infinity.
      out.censored = true;
      out.exit_point = cur;
      out.exit_time_sum = std::numeric_limits<double>::infinity();
      return out;
    }
    if (r < cfg.min_radius) {
      out.censored = true;
      out.exit_point = cur;
      return out;
    }
    on_ball(cur, r);
    out.exit_time_sum += kappa * std::pow(r, p.alpha);
    ++out.steps;
    cur = sample_ball_exit(p, BallSpec(cur, r), rng);
    if (!contains(D, cur)) {
      out.exit_point = cur;
      return out;
    }
  }
}

}  // namespace detail

/// One exact walk-on-spheres trajectory of the alpha-stable process from x in D.
WalkOutcome run_walk(const StableParams& p, const DomainSpec& D, const Point& x, const WalkConfig& cfg,
                     RngStream& rng);

/// Walk in U from x, then (if the exit lies in D) continue in D. U must be a subset of D.
WalkOutcome run_two_stage_walk(const StableParams& p, const DomainSpec& D, const DomainSpec& U, const Point& x,
                               const WalkConfig& cfg, RngStream& rng);

/// Mean of payoff(exit position) over n walks: the harmonic-measure integral.
MCEstimate estimate_harmonic_expectation(const StableParams& p, const DomainSpec& D, const Point& x,
                                         const Payoff& payoff, std::uint64_t n, const WalkConfig& cfg,
                                         const RngStream& rng);

/// Expected exit time s_D(x) through the per-ball exit-time sums.
MCEstimate estimate_exit_time(const StableParams& p, const DomainSpec& D, const Point& x, std::uint64_t n,
                              const WalkConfig& cfg, const RngStream& rng);

/// Collision estimator of the Poisson kernel P_D(x, y); y must be at positive distance from D.
MCEstimate estimate_poisson_kernel(const StableParams& p, const DomainSpec& D, const Point& x, const Point& y,
                                   std::uint64_t n, const WalkConfig& cfg, const RngStream& rng);

/// G_D(x, v) = G_B(x, v) - E G_B(W, v) with B the bounding ball of D and W the exit position.
MCEstimate estimate_green(const StableParams& p, const DomainSpec& D, const Point& x, const Point& v,
                          std::uint64_t n, const WalkConfig& cfg, const RngStream& rng);

struct RatioEstimate {
  MCEstimate numerator;
  MCEstimate denominator;
  double ratio = 0.0;
  double std_error = 0.0;
};

/// G_D(x, v) / G_D(x0, v) with paired walks (walk i from x and from x0 share
/// stream i) and a delta-method standard error.
RatioEstimate estimate_green_ratio(const StableParams& p, const DomainSpec& D, const Point& x, const Point& x0,
                                   const Point& v, std::uint64_t n, const WalkConfig& cfg, const RngStream& rng);

struct WalkFunctionals {
  MCEstimate harmonic;
  MCEstimate exit_time;
};

/// Harmonic expectation and exit time from the same direct walks.
WalkFunctionals estimate_walk_functionals(const StableParams& p, const DomainSpec& D, const Point& x,
                                          const Payoff& payoff, std::uint64_t n, const WalkConfig& cfg,
                                          const RngStream& rng);

/// Same functionals through the two-stage decomposition: first exit U, then restart in D.
WalkFunctionals estimate_walk_functionals_two_stage(const StableParams& p, const DomainSpec& D, const DomainSpec& U,
                                                    const Point& x, const Payoff& payoff, std::uint64_t n,
                                                    const WalkConfig& cfg, const RngStream& rng);

/// Number of workers used for a requested count (0 = hardware parallelism).
int resolve_workers(int requested);

}  // namespace fracpot
