#include "fracpot/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

namespace fracpot {

Point sample_unit_sphere(const StableParams& p, RngStream& rng) {
  Point u(p.d);
  if (p.d == 1) {
    u[0] = (rng.next_u64() >> 63) ? 1.0 : -1.0;
    return u;
  }
  double n2 = 0.0;
  do {
    for (int i = 0; i < p.d; ++i) u[i] = rng.normal();
    n2 = u.norm2();
  } while (n2 == 0.0);
  return u * (1.0 / std::sqrt(n2));
}

double sample_ball_exit_radius(const StableParams& p, RngStream& rng) {
  // V = R^{-2} ~ Beta(a, 1 - a) as a ratio of gamma variates, in log space.
  const double a = 0.5 * p.alpha;
  const double lg1 = rng.log_gamma_variate(a);
  const double lg2 = rng.log_gamma_variate(1.0 - a);
  const double t = lg2 - lg1;
  const double log_v = t > 0.0 ? -(t + std::log1p(std::exp(-t))) : -std::log1p(std::exp(t));
  // R - 1 ~ V^{-1} - 1 can fall below the double resolution at 1; R = 1 would
  // land on the sphere, so the smallest representable exterior radius is used.
  return std::max(std::exp(-0.5 * log_v), std::nextafter(1.0, 2.0));
}

Point sample_ball_exit(const StableParams& p, const BallSpec& ball, RngStream& rng) {
  const double r = sample_ball_exit_radius(p, rng);
  return ball.center + (ball.radius * r) * sample_unit_sphere(p, rng);
}

double ball_exit_radius_cdf(const StableParams& p, double r) {
  if (r <= 1.0) return 0.0;
  const double a = 0.5 * p.alpha;
  return 1.0 - reg_inc_beta(1.0 / (r * r), a, 1.0 - a);
}

WalkOutcome run_walk(const StableParams& p, const DomainSpec& D, const Point& x, const WalkConfig& cfg,
                     RngStream& rng) {
  if (!contains(D, x)) throw DomainError("run_walk: start point is not in the domain");
  return detail::walk(p, D, x, cfg, rng, [](const Point&, double) {});
}

WalkOutcome run_two_stage_walk(const StableParams& p, const DomainSpec& D, const DomainSpec& U, const Point& x,
                               const WalkConfig& cfg, RngStream& rng) {
  if (!contains(U, x)) throw DomainError("run_two_stage_walk: start point is not in the inner domain");
  WalkOutcome first = detail::walk(p, U, x, cfg, rng, [](const Point&, double) {});
  if (first.censored || !contains(D, first.exit_point)) return first;
  WalkConfig rest = cfg;
  rest.max_steps = cfg.max_steps > first.steps ? cfg.max_steps - first.steps : 0;
  WalkOutcome second = detail::walk(p, D, first.exit_point, rest, rng, [](const Point&, double) {});
  second.steps += first.steps;
  second.exit_time_sum += first.exit_time_sum;
  return second;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Per-walk contribution: up to two paired values.
struct Sample {
  double a = 0.0;
  double b = 0.0;
  bool censored = false;
};

// Log-log slope of the partial exit-time sums above which the mean is
// reported as possibly infinite.
constexpr double kSuperlinearSlope = 1.2;
// Share of the exit-time sum carried by the single largest walk above which
// the mean is reported as possibly infinite. It tends to 0 for a finite mean
// and stays near 1 - beta for a tail P(tau > t) ~ t^{-beta}, beta < 1.
constexpr double kMaxShare = 0.2;

// Running first and second moments of (a, b), mergeable in a fixed order.

struct Moments {
  std::uint64_t n = 0;
  std::uint64_t censored = 0;
  std::uint64_t nonfinite = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double m2_a = 0.0, m2_b = 0.0, c_ab = 0.0;
  double max_a = -std::numeric_limits<double>::infinity();

  void add(const Sample& s) {
    if (s.censored) ++censored;
    if (!std::isfinite(s.a) || !std::isfinite(s.b)) {
      ++nonfinite;
      return;
    }
    ++n;
    max_a = std::max(max_a, s.a);
    const double inv = 1.0 / static_cast<double>(n);
    const double da = s.a - mean_a;
    const double db = s.b - mean_b;
    mean_a += da * inv;
    mean_b += db * inv;
    m2_a += da * (s.a - mean_a);
    m2_b += db * (s.b - mean_b);
    c_ab += da * (s.b - mean_b);
  }

  static Moments merge(const Moments& x, const Moments& y) {
    Moments out;
    out.censored = x.censored + y.censored;
    out.nonfinite = x.nonfinite + y.nonfinite;
    out.n = x.n + y.n;
    out.max_a = std::max(x.max_a, y.max_a);
    if (out.n == 0) return out;
    if (x.n == 0) {
      Moments c = y;
      c.censored = out.censored;
      c.nonfinite = out.nonfinite;
      c.max_a = out.max_a;
      return c;
    }
    if (y.n == 0) {
      Moments c = x;
      c.censored = out.censored;
      c.nonfinite = out.nonfinite;
      c.max_a = out.max_a;
      return c;
    }
    const double nx = static_cast<double>(x.n), ny = static_cast<double>(y.n), nt = static_cast<double>(out.n);
    const double da = y.mean_a - x.mean_a;
    const double db = y.mean_b - x.mean_b;
    out.mean_a = x.mean_a + da * ny / nt;
    out.mean_b = x.mean_b + db * ny / nt;
    out.m2_a = x.m2_a + y.m2_a + da * da * nx * ny / nt;
    out.m2_b = x.m2_b + y.m2_b + db * db * nx * ny / nt;
    out.c_ab = x.c_ab + y.c_ab + da * db * nx * ny / nt;
    return out;
  }

  std::uint64_t total() const { return n + nonfinite; }
};

constexpr std::uint64_t kBlock = 256;

using SampleFn = std::function<Sample(std::uint64_t walk_index, RngStream& rng)>;

// Runs walks [begin, end) in fixed blocks across workers and merges the block
// moments by an indexed pairwise tree, so the result is independent of the
// number of workers and of scheduling.
Moments run_walks(std::uint64_t begin, std::uint64_t end, int workers, const RngStream& base, const SampleFn& fn) {
  if (end <= begin) return {};
  const std::uint64_t n = end - begin;
  const std::uint64_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<Moments> partial(blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&]() {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        Moments m;
        const std::uint64_t lo = begin + b * kBlock;
        const std::uint64_t hi = std::min(end, lo + kBlock);
        for (std::uint64_t i = lo; i < hi; ++i) {
          RngStream rng = base.split(i);
          m.add(fn(i, rng));
        }
        partial[b] = m;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };

  const int threads = static_cast<int>(std::min<std::uint64_t>(resolve_workers(workers), blocks));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  while (partial.size() > 1) {
    std::vector<Moments> next_level;
    next_level.reserve((partial.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < partial.size(); i += 2) next_level.push_back(Moments::merge(partial[i], partial[i + 1]));
    if (partial.size() % 2 == 1) next_level.push_back(partial.back());
    partial = std::move(next_level);
  }
  return partial.front();
}

MCEstimate to_estimate_a(const Moments& m) {
  MCEstimate e;
  e.n = m.total();
  e.censored_fraction = e.n ? static_cast<double>(m.censored) / static_cast<double>(e.n) : 0.0;
  if (m.nonfinite > 0) {
    e.mean = std::numeric_limits<double>::infinity();
    e.std_error = std::numeric_limits<double>::infinity();
    e.possibly_infinite = true;
    e.note = "non-finite walk contributions";
  } else {
    e.mean = m.mean_a;
    e.std_error = m.n > 1 ? std::sqrt(m.m2_a / static_cast<double>(m.n - 1) / static_cast<double>(m.n)) : 0.0;
  }
  e.healthy = e.censored_fraction <= kCensoredCeiling && !e.possibly_infinite;
  return e;
}

MCEstimate to_estimate_b(Moments m) {
  std::swap(m.mean_a, m.mean_b);
  std::swap(m.m2_a, m.m2_b);
  return to_estimate_a(m);
}

void require_start(const DomainSpec& D, const Point& x, const char* what) {
  if (x.dim() != D.dim()) throw DomainError(std::string(what) + ": dimension mismatch");
  if (!contains(D, x)) throw DomainError(std::string(what) + ": start point is not in the domain");
}

Point exit_or_projection(const DomainSpec& D, const WalkOutcome& w) {
  return w.censored ? project_to_boundary(D, w.last_interior) : w.exit_point;
}

}  // namespace

MCEstimate estimate_harmonic_expectation(const StableParams& p, const DomainSpec& D, const Point& x,
                                         const Payoff& payoff, std::uint64_t n, const WalkConfig& cfg,
                                         const RngStream& rng) {
  require_start(D, x, "estimate_harmonic_expectation");
  const Moments m = run_walks(0, n, cfg.workers, rng, [&](std::uint64_t, RngStream& r) {
    const WalkOutcome w = detail::walk(p, D, x, cfg, r, [](const Point&, double) {});
    return Sample{payoff(exit_or_projection(D, w)), 0.0, w.censored};
  });
  return to_estimate_a(m);
}

MCEstimate estimate_exit_time(const StableParams& p, const DomainSpec& D, const Point& x, std::uint64_t n,
                              const WalkConfig& cfg, const RngStream& rng) {
  require_start(D, x, "estimate_exit_time");
  auto fn = [&](std::uint64_t, RngStream& r) {
    const WalkOutcome w = detail::walk(p, D, x, cfg, r, [](const Point&, double) {});
    return Sample{w.exit_time_sum, 0.0, w.censored};
  };
  const bool guard = !bounding_ball(D).has_value() && p.alpha >= p.d;
  if (!guard) return to_estimate_a(run_walks(0, n, cfg.workers, rng, fn));

  // Recurrent regime on an unbounded domain: fit the growth of the partial
  // sum over nested prefixes n / 32, n / 16, ..., n. A finite mean gives
  // slope 1 in log-log; a tail P(tau > t) ~ t^{-beta} with beta < 1 gives
  // slope about 1 / beta.
  constexpr int kLevels = 6;
  Moments acc;
  std::uint64_t done = 0;
  std::vector<double> log_n, log_sum;
  for (int k = kLevels - 1; k >= 0; --k) {
    const std::uint64_t upto = n >> k;
    acc = Moments::merge(acc, run_walks(done, upto, cfg.workers, rng, fn));
    done = upto;
    if (acc.n > 0 && acc.mean_a > 0.0) {
      log_n.push_back(std::log(static_cast<double>(acc.n)));
      log_sum.push_back(std::log(acc.mean_a * static_cast<double>(acc.n)));
    }
  }
  MCEstimate e = to_estimate_a(acc);
  bool growing = false;
  if (log_n.size() >= 3) {
    const double mx = std::accumulate(log_n.begin(), log_n.end(), 0.0) / static_cast<double>(log_n.size());
    const double my = std::accumulate(log_sum.begin(), log_sum.end(), 0.0) / static_cast<double>(log_sum.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      sxy += (log_n[i] - mx) * (log_sum[i] - my);
      sxx += (log_n[i] - mx) * (log_n[i] - mx);
    }
    growing = sxy / sxx > kSuperlinearSlope;
  }
  const double total = acc.mean_a * static_cast<double>(acc.n);
  if (acc.n >= 1000 && total > 0.0 && acc.max_a > kMaxShare * total) growing = true;
  if (growing || e.possibly_infinite) {
    e.possibly_infinite = true;
    e.healthy = false;
    e.note = "partial sums grow superlinearly in the walk count or are carried by single walks; s_D may be infinite";
  }
  return e;
}

MCEstimate estimate_poisson_kernel(const StableParams& p, const DomainSpec& D, const Point& x, const Point& y,
                                   std::uint64_t n, const WalkConfig& cfg, const RngStream& rng) {
  require_start(D, x, "estimate_poisson_kernel");
  if (y.dim() != D.dim()) throw DomainError("estimate_poisson_kernel: dimension mismatch");
  if (!(exterior_distance_lower_bound(D, y) > 0.0))
    throw DomainError("estimate_poisson_kernel: y must be at a certified positive distance from the domain");
  const double c = poisson_const(p);
  const double half_alpha = 0.5 * p.alpha;
  const Moments m = run_walks(0, n, cfg.workers, rng, [&](std::uint64_t, RngStream& r) {
    double score = 0.0;
    const WalkOutcome w = detail::walk(p, D, x, cfg, r, [&](const Point& center, double radius) {
      // P_{B(center, radius)}(center, y), written out to skip the argument checks.
      const double dist2 = (y - center).norm2();
      const double r2 = radius * radius;
      score += c * std::pow(r2 / (dist2 - r2), half_alpha) * std::pow(dist2, -0.5 * p.d);
    });
    return Sample{score, 0.0, w.censored};
  });
  return to_estimate_a(m);
}

MCEstimate estimate_green(const StableParams& p, const DomainSpec& D, const Point& x, const Point& v,
                          std::uint64_t n, const WalkConfig& cfg, const RngStream& rng) {
  const auto outer = bounding_ball(D);
  if (!outer) throw Unsupported("estimate_green: the domain is not bounded by construction");
  require_start(D, x, "estimate_green");
  require_start(D, v, "estimate_green");
  if (x == v) throw DomainError("estimate_green: x and v must differ");
  const double first = ball_green(p, *outer, x, v);
  const Moments m = run_walks(0, n, cfg.workers, rng, [&](std::uint64_t, RngStream& r) {
    const WalkOutcome w = detail::walk(p, D, x, cfg, r, [](const Point&, double) {});
    return Sample{first - ball_green(p, *outer, exit_or_projection(D, w), v), 0.0, w.censored};
  });
  MCEstimate e = to_estimate_a(m);
  if (e.mean != 0.0 && e.std_error / std::abs(e.mean) > 1.0) e.note = "high variance: stderr exceeds |mean|";
  return e;
}

RatioEstimate estimate_green_ratio(const StableParams& p, const DomainSpec& D, const Point& x, const Point& x0,
                                   const Point& v, std::uint64_t n, const WalkConfig& cfg, const RngStream& rng) {
  const auto outer = bounding_ball(D);
  if (!outer) throw Unsupported("estimate_green_ratio: the domain is not bounded by construction");
  require_start(D, x, "estimate_green_ratio");
  require_start(D, x0, "estimate_green_ratio");
  require_start(D, v, "estimate_green_ratio");
  if (x == v || x0 == v) throw DomainError("estimate_green_ratio: probe point coincides with a pole");
  const double gx = ball_green(p, *outer, x, v);
  const double gx0 = ball_green(p, *outer, x0, v);
  const Moments m = run_walks(0, n, cfg.workers, rng, [&](std::uint64_t, RngStream& r) {
    RngStream r0 = r;
    const WalkOutcome wx = detail::walk(p, D, x, cfg, r, [](const Point&, double) {});
    const WalkOutcome wx0 = detail::walk(p, D, x0, cfg, r0, [](const Point&, double) {});
    return Sample{gx - ball_green(p, *outer, exit_or_projection(D, wx), v),
                  gx0 - ball_green(p, *outer, exit_or_projection(D, wx0), v), wx.censored || wx0.censored};
  });
  RatioEstimate out;
  out.numerator = to_estimate_a(m);
  out.denominator = to_estimate_b(m);
  out.ratio = m.mean_a / m.mean_b;
  if (m.n > 1) {
    const double nn = static_cast<double>(m.n);
    const double var = (m.m2_a - 2.0 * out.ratio * m.c_ab + out.ratio * out.ratio * m.m2_b) / (nn - 1.0);
    out.std_error = std::sqrt(std::max(var, 0.0) / nn) / std::abs(m.mean_b);
  }
  return out;
}

WalkFunctionals estimate_walk_functionals(const StableParams& p, const DomainSpec& D, const Point& x,
                                          const Payoff& payoff, std::uint64_t n, const WalkConfig& cfg,
                                          const RngStream& rng) {
  require_start(D, x, "estimate_walk_functionals");
  const Moments m = run_walks(0, n, cfg.workers, rng, [&](std::uint64_t, RngStream& r) {
    const WalkOutcome w = detail::walk(p, D, x, cfg, r, [](const Point&, double) {});
    return Sample{payoff(exit_or_projection(D, w)), w.exit_time_sum, w.censored};
  });
  return {to_estimate_a(m), to_estimate_b(m)};
}

WalkFunctionals estimate_walk_functionals_two_stage(const StableParams& p, const DomainSpec& D, const DomainSpec& U,
                                                    const Point& x, const Payoff& payoff, std::uint64_t n,
                                                    const WalkConfig& cfg, const RngStream& rng) {
  require_start(U, x, "estimate_walk_functionals_two_stage");
  require_start(D, x, "estimate_walk_functionals_two_stage");
  const Moments m = run_walks(0, n, cfg.workers, rng, [&](std::uint64_t, RngStream& r) {
    const WalkOutcome w = run_two_stage_walk(p, D, U, x, cfg, r);
    return Sample{payoff(exit_or_projection(D, w)), w.exit_time_sum, w.censored};
  });
  return {to_estimate_a(m), to_estimate_b(m)};
}

}  // namespace fracpot
