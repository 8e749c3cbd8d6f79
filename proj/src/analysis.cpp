#include "fracpot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fracpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Stream reserved for geometric sampling (configurations, pairs); estimator
// streams use small indices.
constexpr std::uint64_t kGeometryStream = ~std::uint64_t{0};

Point zero_point(int d) { return Point(d); }

bool is_origin(const Point& y) { return y.norm2() == 0.0; }

// Uniform point of the ball by rejection from the bounding cube.
Point sample_in_ball(const Point& center, double radius, RngStream& rng) {
  const int d = center.dim();
  for (;;) {
    Point u(d);
    for (int i = 0; i < d; ++i) u[i] = 2.0 * rng.uniform() - 1.0;
    if (u.norm2() < 1.0) return center + radius * u;
  }
}

template <class Accept>
Point sample_in_cube(const Point& center, double half_side, RngStream& rng, Accept&& accept, const char* what) {
  const int d = center.dim();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Point u(d);
    for (int i = 0; i < d; ++i) u[i] = 2.0 * rng.uniform() - 1.0;
    const Point z = center + half_side * u;
    if (accept(z)) return z;
  }
  throw DomainError(std::string(what) + ": no admissible point found by rejection sampling");
}

double rel_se(const MCEstimate& e) { return e.mean != 0.0 ? e.std_error / std::abs(e.mean) : kInf; }

// |a - b| in units of sigma; exact agreement counts as zero even when sigma is zero.
double z_score(double a, double b, double sigma) {
  const double diff = std::abs(a - b);
  if (diff == 0.0) return 0.0;
  return sigma > 0.0 ? diff / sigma : kInf;
}

std::vector<double> flatten(std::initializer_list<const Point*> pts) {
  std::vector<double> out;
  for (const Point* q : pts)
    for (int i = 0; i < q->dim(); ++i) out.push_back((*q)[i]);
  return out;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accessible:
      return "Accessible";
    case Verdict::Inaccessible:
      return "Inaccessible";
    case Verdict::Undetermined:
      return "Undetermined";
  }
  return "Undetermined";
}

bool AuditCheck::ok() const { return std::isfinite(value) && value <= limit; }

bool AuditReport::passed() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.ok(); });
}

std::vector<Point> kronecker_lattice(int d, int count) {
  // phi_d is the real root of x^{d+1} = x + 1; g_i = phi_d^{-(i+1)}.
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (d + 1));
  std::vector<double> g(d);
  for (int i = 0; i < d; ++i) g[i] = std::pow(phi, -(i + 1));
  std::vector<Point> out;
  out.reserve(count);
  for (int j = 1; j <= count; ++j) {
    Point u(d);
    for (int i = 0; i < d; ++i) {
      const double v = 0.5 + j * g[i];
      u[i] = v - std::floor(v);
    }
    out.push_back(u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Accessibility

Classification thorn_integral_test(const StableParams& p, double gamma, double width_scale) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("thorn_integral_test: gamma must be positive");
  if (!(width_scale > 0.0) || !std::isfinite(width_scale))
    throw DomainError("thorn_integral_test: width_scale must be positive");
  const double m = p.d + p.alpha - 1.0;
  // t^{-d-alpha} (s t^gamma)^{d+alpha-1} = s^m t^{(gamma-1) m - 1}.
  const double exponent = (gamma - 1.0) * m - 1.0;
  const double coef = std::pow(width_scale, m);
  Classification c;
  c.boundary_point = zero_point(p.d);
  c.method = "analytic";
  c.evidence = divergence_probe([&](double t) { return coef * std::pow(t, exponent); }, 1.0,
                                geometric_cutoffs(1.0, 0.5, 40));
  if (gamma > 1.0) {
    c.verdict = Verdict::Inaccessible;
    c.integral = coef / (m * (gamma - 1.0));
    if (c.evidence.is_divergent()) c.note = "numeric probe disagrees with the analytic decision";
    else if (c.evidence.is_undetermined()) c.note = "numeric probe inconclusive near gamma = 1; analytic decision";
  } else {
    c.verdict = Verdict::Accessible;
    if (c.evidence.is_finite()) c.note = "numeric probe disagrees with the analytic decision";
  }
  return c;
}

Classification cusp_vertex_test(const StableParams& p, double gamma) {
  if (p.d != 2) throw DomainError("cusp_vertex_test: cusps are planar (d = 2)");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("cusp_vertex_test: gamma must be positive");
  Classification c = thorn_integral_test(p, 1.0 / gamma, 1.0);
  c.note = c.note.empty() ? "cusp rewritten as a thorn with exponent 1/gamma" : c.note;
  return c;
}

Classification classify_boundary_point(const StableParams& p, const DomainSpec& D, const Point& y,
                                       const ShellBudget& budget, const WalkConfig& cfg, const RngStream& rng) {
  if (y.dim() != D.dim() || D.dim() != p.d) throw DomainError("classify_boundary_point: dimension mismatch");
  if (const auto* t = D.as<shape::ThornPower>(); t && is_origin(y)) {
    Classification c = thorn_integral_test(p, t->gamma, t->width_scale);
    c.boundary_point = y;
    return c;
  }
  if (const auto* cu = D.as<shape::CuspRegion>(); cu && is_origin(y)) {
    Classification c = cusp_vertex_test(p, cu->gamma);
    c.boundary_point = y;
    return c;
  }
  if (contains(D, y)) throw DomainError("classify_boundary_point: y lies inside D");
  if (budget.shells < 1 || budget.lattice_points < 1 || budget.walks_per_point < 1)
    throw DomainError("classify_boundary_point: empty budget");

  const int d = p.d;
  const auto lattice = kronecker_lattice(d, budget.lattice_points);

  // Limit-point validation before any sampling: D must meet the finest cube.
  {
    const double h = std::ldexp(1.0, -budget.shells);
    const auto fine = kronecker_lattice(d, 4096);
    const bool hit = std::any_of(fine.begin(), fine.end(), [&](const Point& u) {
      Point v = y;
      for (int i = 0; i < d; ++i) v[i] += h * (2.0 * u[i] - 1.0);
      return contains(D, v);
    });
    if (!hit) throw DomainError("classify_boundary_point: y is not a limit point of D");
  }

  const DomainSpec local = DomainSpec::intersection_of({D, DomainSpec::ball(y, 1.0)});
  std::vector<double> cutoffs, increments;
  int used_shells = 0;
  double censored = 0.0;
  std::uint64_t total_walks = 0;
  for (int k = 0; k < budget.shells; ++k) {
    const double h = std::ldexp(1.0, -k);
    const double cell = std::pow(2.0 * h, d) / budget.lattice_points;
    const RngStream shell_rng = rng.split(static_cast<std::uint64_t>(k));
    double sum = 0.0;
    int accepted = 0;
    for (int j = 0; j < budget.lattice_points; ++j) {
      Point v = y;
      for (int i = 0; i < d; ++i) v[i] += h * (2.0 * lattice[j][i] - 1.0);
      const double rad = distance(v, y);
      if (rad < 0.5 * h || rad >= h || !contains(local, v)) continue;
      const MCEstimate s =
          estimate_exit_time(p, local, v, budget.walks_per_point, cfg, shell_rng.split(static_cast<std::uint64_t>(j)));
      sum += s.mean * levy_density(p, v, y);
      censored += s.censored_fraction * static_cast<double>(s.n);
      total_walks += s.n;
      ++accepted;
    }
    if (accepted > 0) ++used_shells;
    cutoffs.push_back(0.5 * h);
    increments.push_back(cell * sum);
  }

  Classification c;
  c.boundary_point = y;
  c.method = "shells";
  c.evidence = divergence_from_increments(cutoffs, increments);
  if (used_shells < 4) {
    c.verdict = Verdict::Undetermined;
    c.note = "fewer than 4 shells contained lattice points of D";
  } else if (c.evidence.is_divergent()) {
    c.verdict = Verdict::Accessible;
  } else if (c.evidence.is_finite()) {
    c.verdict = Verdict::Inaccessible;
  } else {
    c.verdict = Verdict::Undetermined;
  }
  if (total_walks > 0 && censored / static_cast<double>(total_walks) > kCensoredCeiling)
    c.note += (c.note.empty() ? "" : "; ") + std::string("censored walks above the health ceiling");
  return c;
}

Classification classify_infinity(const StableParams& p, const DomainSpec& D, const Point& x_probe,
                                 const InfinityBudget& budget, const WalkConfig& cfg, const RngStream& rng) {
  if (bounding_ball(D)) throw DomainError("classify_infinity: D is bounded, infinity is not a boundary point");
  if (x_probe.dim() != D.dim()) throw DomainError("classify_infinity: dimension mismatch");
  if (!contains(D, x_probe)) throw DomainError("classify_infinity: probe point is not in D");
  if (budget.levels < 2 || budget.initial_walks < 2) throw DomainError("classify_infinity: need at least 2 levels");

  Classification c;
  c.method = "budget-growth";
  std::uint64_t n = budget.initial_walks;
  for (int j = 0; j < budget.levels; ++j, n *= 4) {
    // Same stream at every level: level j reuses the walks of level j-1.
    const MCEstimate e = estimate_exit_time(p, D, x_probe, n, cfg, rng);
    c.levels.push_back({n, e});
    c.evidence.probe_values.push_back({static_cast<double>(n), e.mean});
    if (!std::isfinite(e.mean) || e.censored_fraction > 0.5) {
      c.verdict = Verdict::Accessible;
      c.evidence.kind = Divergent{kInf};
      c.note = "walks escape to infinity or never exit: s_D(x) is infinite";
      return c;
    }
  }

  // Least-squares slope of log(mean) against log(walks).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(c.levels.size());
  bool positive = true;
  for (const auto& lv : c.levels) {
    if (!(lv.estimate.mean > 0.0)) positive = false;
    const double lx = std::log(static_cast<double>(lv.walks));
    const double ly = std::log(std::max(lv.estimate.mean, std::numeric_limits<double>::min()));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const MCEstimate& first = c.levels.front().estimate;
  const MCEstimate& last = c.levels.back().estimate;
  const double shift = z_score(last.mean, first.mean, std::hypot(first.std_error, last.std_error));
  bool stable = true;
  for (const auto& lv : c.levels)
    if (z_score(lv.estimate.mean, last.mean, std::hypot(lv.estimate.std_error, last.std_error)) > 3.0) stable = false;
  const bool flagged = std::any_of(c.levels.begin(), c.levels.end(),
                                   [](const BudgetLevel& lv) { return lv.estimate.possibly_infinite; });

  // A heavy-tailed exit time makes the standard errors unreliable, so strong
  // growth (mean ~ walks^{1/2} or faster) counts on its own.
  if (flagged || (positive && slope > 0.5) || (positive && slope > 0.2 && last.mean > first.mean && shift > 3.0)) {
    c.verdict = Verdict::Accessible;
    c.evidence.kind = Divergent{slope};
    c.note = "running mean of the exit time grows with the walk budget";
  } else if (positive && stable && std::abs(slope) < 0.1 && last.censored_fraction <= kCensoredCeiling) {
    c.verdict = Verdict::Inaccessible;
    c.evidence.kind = Finite{last.mean};
    c.note = "exit time estimate is stable across budgets";
  } else {
    c.verdict = Verdict::Undetermined;
    c.evidence.kind = Undetermined{};
    c.note = "neither stable nor clearly growing at this budget";
  }
  return c;
}

// ---------------------------------------------------------------------------
// Martin kernel

MartinEstimate estimate_martin_kernel(const StableParams& p, const DomainSpec& D, const Point& x, const Point& x0,
                                      const Point& y, const std::vector<double>& radii, std::uint64_t n,
                                      const WalkConfig& cfg, const RngStream& rng, std::optional<Point> inward) {
  if (radii.empty()) throw DomainError("estimate_martin_kernel: no radii");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0.0)) throw DomainError("estimate_martin_kernel: radii must be positive");
    if (j > 0 && !(radii[j] < radii[j - 1])) throw DomainError("estimate_martin_kernel: radii must decrease");
  }
  if (!contains(D, x) || !contains(D, x0)) throw DomainError("estimate_martin_kernel: x and x0 must lie in D");
  if (contains(D, y)) throw DomainError("estimate_martin_kernel: y lies inside D");
  const auto outer = bounding_ball(D);
  if (!outer) throw Unsupported("estimate_martin_kernel: the domain is not bounded by construction");

  Point dir;
  if (inward) {
    dir = *inward;
  } else if (const auto* b = D.as<shape::Ball>()) {
    dir = b->ball.center - y;
  } else {
    dir = x0 - y;
  }
  if (dir.dim() != p.d || !(dir.norm() > 0.0)) throw DomainError("estimate_martin_kernel: no inward direction");
  dir = dir * (1.0 / dir.norm());

  MartinEstimate out;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    MartinLevel lv;
    lv.radius = radii[j];
    lv.probe = y + radii[j] * dir;
    if (!contains(D, lv.probe) || lv.probe == x || lv.probe == x0) {
      lv.skipped = true;
      out.notes.push_back("level " + std::to_string(j) + " skipped: probe point not usable");
    } else {
      lv.estimate = estimate_green_ratio(p, D, x, x0, lv.probe, n, cfg, rng.split(j));
    }
    out.levels.push_back(lv);
  }

  std::vector<int> used;
  for (std::size_t j = 0; j < out.levels.size(); ++j)
    if (!out.levels[j].skipped) used.push_back(static_cast<int>(j));
  if (used.empty()) throw DomainError("estimate_martin_kernel: every probe level was skipped");

  int pick = -1;
  for (auto it = used.rbegin(); it != used.rend(); ++it) {
    const RatioEstimate& e = out.levels[*it].estimate;
    if (std::isfinite(e.ratio) && e.std_error <= 0.05 * std::abs(e.ratio)) {
      pick = *it;
      break;
    }
  }
  if (pick < 0) {
    pick = used.back();
    out.notes.push_back("no level reached 5% relative standard error; using the finest level");
  }
  out.selected_level = pick;
  out.value = out.levels[pick].estimate.ratio;
  double truncation = 0.0;
  const auto pos = std::find(used.begin(), used.end(), pick);
  if (pos != used.begin()) truncation = std::abs(out.value - out.levels[*(pos - 1)].estimate.ratio);
  out.std_error = std::hypot(out.levels[pick].estimate.std_error, truncation);
  return out;
}

// ---------------------------------------------------------------------------
// Audits

namespace {

struct CrossRatio {
  double rho = 0.0;
  double std_error = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

CrossRatio cross_ratio(const MCEstimate& p11, const MCEstimate& p22, const MCEstimate& p12, const MCEstimate& p21) {
  CrossRatio c;
  c.lhs = p11.mean * p22.mean;
  c.rhs = p12.mean * p21.mean;
  c.rho = c.lhs / c.rhs;
  const double rel2 = std::pow(rel_se(p11), 2) + std::pow(rel_se(p22), 2) + std::pow(rel_se(p12), 2) +
                      std::pow(rel_se(p21), 2);
  c.std_error = std::abs(c.rho) * std::sqrt(rel2);
  return c;
}

// rho and 1/rho are both instances of the inequality (swap y1, y2).
CrossRatio symmetric(CrossRatio c) {
  if (c.rho < 1.0 && c.rho > 0.0) {
    c.std_error /= c.rho * c.rho;
    c.rho = 1.0 / c.rho;
    std::swap(c.lhs, c.rhs);
  }
  return c;
}

}  // namespace

AuditReport bhp_audit(const StableParams& p, const DomainSpec& D, double r, int n_config, std::uint64_t walks,
                      const WalkConfig& cfg, const RngStream& rng) {
  if (!(r > 0.0)) throw DomainError("bhp_audit: r must be positive");
  if (n_config < 1 || walks < 2) throw DomainError("bhp_audit: empty budget");
  const int d = p.d;
  const Point origin = zero_point(d);
  RngStream geo = rng.split(kGeometryStream);

  auto admissible_x = [&](const Point& z) { return z.norm() < 0.5 * r && contains(D, z); };
  auto admissible_y = [&](const Point& z) {
    const double nz = z.norm();
    return nz > r && nz < 3.0 * r && !contains(D, z) && exterior_distance_lower_bound(D, z) >= 0.05 * r;
  };

  AuditReport rep;
  rep.name = "bhp";
  rep.tolerance = kInf;
  const auto* ball = D.as<shape::Ball>();
  int worst = -1;
  std::vector<CrossRatio> small, large;
  std::vector<AuditCheck> closed_form_checks;
  for (int c = 0; c < n_config; ++c) {
    const Point x1 = sample_in_cube(origin, 0.5 * r, geo, admissible_x, "bhp_audit");
    const Point x2 = sample_in_cube(origin, 0.5 * r, geo, admissible_x, "bhp_audit");
    const Point y1 = sample_in_cube(origin, 3.0 * r, geo, admissible_y, "bhp_audit");
    const Point y2 = sample_in_cube(origin, 3.0 * r, geo, admissible_y, "bhp_audit");
    const RngStream base = rng.split(static_cast<std::uint64_t>(c));
    auto run = [&](std::uint64_t n) {
      const MCEstimate p11 = estimate_poisson_kernel(p, D, x1, y1, n, cfg, base.split(0));
      const MCEstimate p22 = estimate_poisson_kernel(p, D, x2, y2, n, cfg, base.split(1));
      const MCEstimate p12 = estimate_poisson_kernel(p, D, x1, y2, n, cfg, base.split(2));
      const MCEstimate p21 = estimate_poisson_kernel(p, D, x2, y1, n, cfg, base.split(3));
      return cross_ratio(p11, p22, p12, p21);
    };
    const CrossRatio a = run(walks);
    const CrossRatio b = run(4 * walks);
    small.push_back(a);
    large.push_back(b);
    AuditSample s;
    s.configuration = flatten({&x1, &x2, &y1, &y2});
    const CrossRatio bs = symmetric(b);
    s.lhs = bs.lhs;
    s.rhs = bs.rhs;
    s.ratio = bs.rho;
    s.std_error = bs.std_error;
    rep.samples.push_back(s);
    if (worst < 0 || bs.rho > rep.worst_ratio) {
      worst = c;
      rep.worst_ratio = bs.rho;
    }
    if (ball) {
      const double cf = ball_poisson(p, ball->ball, x1, y1) * ball_poisson(p, ball->ball, x2, y2) /
                        (ball_poisson(p, ball->ball, x1, y2) * ball_poisson(p, ball->ball, x2, y1));
      closed_form_checks.push_back(
          {"config " + std::to_string(c) + " |rho - closed form| / sigma", z_score(b.rho, cf, b.std_error), 3.0});
    }
  }
  const CrossRatio ws = symmetric(small[worst]);
  const CrossRatio wl = symmetric(large[worst]);
  rep.checks.push_back({"worst rho is finite", rep.worst_ratio, rep.tolerance});
  rep.checks.push_back({"worst rho shift under 4x budget / combined sigma",
                        z_score(ws.rho, wl.rho, std::hypot(ws.std_error, wl.std_error)), 2.0});
  for (auto& ch : closed_form_checks) rep.checks.push_back(std::move(ch));
  rep.notes.push_back("rho is reported as max(rho, 1/rho); the worst configuration is selected at the 4x budget");
  rep.notes.push_back("the 4x budget run extends the walks of the 1x run (nested streams)");
  return rep;
}

AuditReport factorization_audit(const StableParams& p, const DomainSpec& D, const Point& y, double p_cut,
                                const std::vector<Point>& xs, std::uint64_t walks, const WalkConfig& cfg,
                                const RngStream& rng, int lattice_points) {
  const int d = p.d;
  const auto outer = bounding_ball(D);
  if (!outer || outer->center.norm() + outer->radius > 1.0 + 1e-12)
    throw DomainError("factorization_audit: D must lie inside the unit ball");
  if (!(y.norm() > 1.0)) throw DomainError("factorization_audit: the charge must satisfy |y| > 1");
  if (!(p_cut > 0.0 && p_cut < 1.0)) throw DomainError("factorization_audit: p_cut must lie in (0, 1)");
  if (xs.empty() || walks < 2 || lattice_points < 1) throw DomainError("factorization_audit: empty budget");
  for (const Point& x : xs)
    if (x.dim() != d || !contains(D, x) || !(x.norm() < p_cut))
      throw DomainError("factorization_audit: sample points must lie in D cap B(0, p_cut)");

  const Point origin = zero_point(d);
  const auto lattice = kronecker_lattice(d, lattice_points);
  const double cell = std::pow(2.0, d) / lattice_points;

  struct Side {
    double upper = 0.0, upper_se = 0.0, lower = 0.0, lower_se = 0.0;
    double lambda = 0.0;
    std::vector<AuditSample> samples;
  };
  auto run = [&](std::uint64_t n) {
    Side out;
    const RngStream lam_rng = rng.split(0);
    double integral = 0.0, var = 0.0;
    for (int j = 0; j < lattice_points; ++j) {
      Point z(d);
      for (int i = 0; i < d; ++i) z[i] = 2.0 * lattice[j][i] - 1.0;
      if (z.norm() < p_cut || !contains(D, z)) continue;
      const MCEstimate pz = estimate_poisson_kernel(p, D, z, y, n, cfg, lam_rng.split(static_cast<std::uint64_t>(j)));
      const double w = cell * levy_density(p, origin, z);
      integral += w * pz.mean;
      var += std::pow(w * pz.std_error, 2);
    }
    out.lambda = levy_density(p, origin, y) + integral;
    const double lambda_rel = std::sqrt(var) / out.lambda;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const RngStream xr = rng.split(1 + i);
      const MCEstimate pk = estimate_poisson_kernel(p, D, xs[i], y, n, cfg, xr.split(0));
      const MCEstimate s = estimate_exit_time(p, D, xs[i], n, cfg, xr.split(1));
      const double ratio = pk.mean / (out.lambda * s.mean);
      const double rel = std::sqrt(std::pow(rel_se(pk), 2) + std::pow(rel_se(s), 2) + lambda_rel * lambda_rel);
      AuditSample smp;
      smp.configuration = flatten({&xs[i]});
      smp.lhs = pk.mean;
      smp.rhs = out.lambda * s.mean;
      smp.ratio = ratio;
      smp.std_error = ratio * rel;
      if (ratio > out.upper) {
        out.upper = ratio;
        out.upper_se = ratio * rel;
      }
      if (1.0 / ratio > out.lower) {
        out.lower = 1.0 / ratio;
        out.lower_se = rel / ratio;
      }
      out.samples.push_back(smp);
    }
    return out;
  };
  const Side a = run(walks);
  const Side b = run(2 * walks);

  AuditReport rep;
  rep.name = "factorization";
  rep.samples = b.samples;
  rep.worst_ratio = std::max(b.upper, b.lower);
  rep.tolerance = kInf;
  rep.checks.push_back({"max of ratio and reciprocal is finite", rep.worst_ratio, rep.tolerance});
  rep.checks.push_back({"upper constant shift under 2x budget / combined sigma",
                        z_score(a.upper, b.upper, std::hypot(a.upper_se, b.upper_se)), 3.0});
  rep.checks.push_back({"lower constant shift under 2x budget / combined sigma",
                        z_score(a.lower, b.lower, std::hypot(a.lower_se, b.lower_se)), 3.0});
  rep.checks.push_back({"1 / (upper * lower)", 1.0 / (b.upper * b.lower), 1.0});
  rep.notes.push_back("Lambda = " + std::to_string(b.lambda) + " (lattice quadrature; its discretization error is not in sigma)");
  return rep;
}

AuditReport harnack_audit(const StableParams& p, const DomainSpec& D, const Point& center, double r, double s,
                          const Point& y, int pairs, std::uint64_t walks, const WalkConfig& cfg,
                          const RngStream& rng) {
  if (!(r > 0.0 && r < s)) throw DomainError("harnack_audit: need 0 < r < s");
  if (center.dim() != p.d || y.dim() != p.d) throw DomainError("harnack_audit: dimension mismatch");
  if (!contains(D, center) || dist_lower_bound(D, center).radius < s)
    throw DomainError("harnack_audit: B(center, s) is not certified inside D");
  if (!(exterior_distance_lower_bound(D, y) > 0.0))
    throw DomainError("harnack_audit: the charge must be at positive distance from D");
  if (pairs < 1 || walks < 2) throw DomainError("harnack_audit: empty budget");

  const double bound = std::pow((1.0 + r / s) / (1.0 - r / s), p.d);
  const auto* ball = D.as<shape::Ball>();
  RngStream geo = rng.split(kGeometryStream);
  AuditReport rep;
  rep.name = "harnack";
  rep.tolerance = bound;
  double worst_se = 0.0, worst_cf = 0.0;
  for (int i = 0; i < pairs; ++i) {
    // The first pair repeats the center: the ratio is exactly 1.
    const Point x1 = i == 0 ? center : sample_in_ball(center, r, geo);
    const Point x2 = i == 0 ? center : sample_in_ball(center, r, geo);
    const RngStream stream = rng.split(static_cast<std::uint64_t>(i));
    const MCEstimate p1 = estimate_poisson_kernel(p, D, x1, y, walks, cfg, stream);
    const MCEstimate p2 = estimate_poisson_kernel(p, D, x2, y, walks, cfg, stream);
    double ratio = p1.mean / p2.mean;
    double se = ratio * std::hypot(rel_se(p1), rel_se(p2));
    if (x1 == x2) se = 0.0;
    if (ratio < 1.0) {
      se /= ratio * ratio;
      ratio = 1.0 / ratio;
    }
    AuditSample smp;
    smp.configuration = flatten({&x1, &x2});
    smp.lhs = std::max(p1.mean, p2.mean);
    smp.rhs = std::min(p1.mean, p2.mean);
    smp.ratio = ratio;
    smp.std_error = se;
    rep.samples.push_back(smp);
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      worst_se = se;
    }
    if (ball) {
      const double a = ball_poisson(p, ball->ball, x1, y), b = ball_poisson(p, ball->ball, x2, y);
      worst_cf = std::max(worst_cf, std::max(a / b, b / a));
    }
  }
  rep.checks.push_back({"worst ratio - 3 sigma", rep.worst_ratio - 3.0 * worst_se, bound});
  if (ball) rep.checks.push_back({"worst closed-form ratio", worst_cf, bound});
  rep.notes.push_back("ratios are reported as max(P1/P2, P2/P1); each pair shares one random stream");
  return rep;
}

AuditReport kelvin_green_check(const StableParams& p, const BallSpec& ball, int pairs, double tol,
                               const RngStream& rng) {
  if (!(p.alpha < p.d)) throw DomainError("kelvin_green_check: requires alpha < d");
  if (ball.center.dim() != p.d) throw DomainError("kelvin_green_check: dimension mismatch");
  if (!(ball.center.norm() > ball.radius)) throw DomainError("kelvin_green_check: 0 lies in the closed ball");
  if (pairs < 1) throw DomainError("kelvin_green_check: need at least one pair");
  const BallSpec tb = invert_ball(ball);
  const BallSpec ttb = invert_ball(tb);
  const double e = p.alpha - p.d;
  auto T = [](const Point& z) { return z * (1.0 / z.norm2()); };
  RngStream geo = rng.split(kGeometryStream);

  AuditReport rep;
  rep.name = "kelvin-green";
  rep.tolerance = tol;
  double worst_double = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const Point x = sample_in_ball(ball.center, ball.radius, geo);
    const Point v = sample_in_ball(ball.center, ball.radius, geo);
    if (x == v) continue;  // both sides are +inf on the diagonal
    const double lhs = ball_green(p, ball, x, v);
    const Point tx = T(x), tv = T(v);
    const double g_t = ball_green(p, tb, tx, tv);
    const double rhs = std::pow(x.norm(), e) * std::pow(v.norm(), e) * g_t;
    const double dev = std::abs(lhs - rhs) / std::abs(lhs);
    // Second application: TB -> TTB = B.
    const double back = std::pow(tx.norm(), e) * std::pow(tv.norm(), e) * ball_green(p, ttb, T(tx), T(tv));
    worst_double = std::max(worst_double, std::abs(back - g_t) / std::abs(g_t));
    rep.samples.push_back({flatten({&x, &v}), lhs, rhs, rhs / lhs, 0.0});
    rep.worst_ratio = std::max(rep.worst_ratio, dev);
  }
  rep.checks.push_back({"max relative deviation", rep.worst_ratio, tol});
  rep.checks.push_back({"double inversion max relative deviation", worst_double, tol});
  rep.notes.push_back("worst_ratio is the maximum relative deviation between the two sides");
  return rep;
}

namespace {

// Distance from z (inside the ball) to the sphere along the unit direction w.
double ray_to_sphere(const BallSpec& b, const Point& z, const Point& w) {
  const Point q = z - b.center;
  const double bq = dot(w, q);
  return -bq + std::sqrt(bq * bq - (q.norm2() - b.radius * b.radius));
}

// int_{TB} G_{TB}(z, y) nu(0, y) dy in polar coordinates around z, with
// sigma = rho^alpha on every ray to absorb the rho^{alpha-1} singularity.
double kelvin_left_side(const StableParams& p, const BallSpec& tb, const Point& z, double scale) {
  const int d = p.d;
  const double a = p.alpha;
  const Point origin(d);
  auto ray = [&](const Point& w, double tol) {
    const double rho_max = ray_to_sphere(tb, z, w);
    auto f = [&](double sigma) {
      const double rho = std::pow(sigma, 1.0 / a);
      const Point yv = z + rho * w;
      return ball_green(p, tb, z, yv) * levy_density(p, origin, yv) * std::pow(rho, d - a) / a;
    };
    return adaptive_quad(f, 0.0, std::pow(rho_max, a), tol).value;
  };
  const double inner_tol = 1e-11 * scale;
  if (d == 1) {
    return ray(Point{1.0}, inner_tol) + ray(Point{-1.0}, inner_tol);
  }
  if (d == 2) {
    auto g = [&](double th) { return ray(Point{std::cos(th), std::sin(th)}, inner_tol); };
    return adaptive_quad(g, 0.0, 2.0 * std::numbers::pi, 1e-10 * scale).value;
  }
  if (d == 3) {
    // Orthonormal frame with e3 along the axis through z and the center of TB.
    Point e3 = tb.center - z;
    if (!(e3.norm() > 1e-14 * tb.radius)) e3 = z;
    e3 = e3 * (1.0 / e3.norm());
    Point e1 = std::abs(e3[0]) < 0.9 ? Point{1.0, 0.0, 0.0} : Point{0.0, 1.0, 0.0};
    e1 = e1 - dot(e1, e3) * e3;
    e1 = e1 * (1.0 / e1.norm());
    const Point e2{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2], e3[0] * e1[1] - e3[1] * e1[0]};
    // When 0, z and the center are collinear the integrand is axially symmetric.
    const Point zc = z - dot(z, e3) * e3;
    const bool axial = zc.norm() <= 1e-14 * std::max(1.0, z.norm());
    auto dir = [&](double th, double ph) {
      return std::sin(th) * std::cos(ph) * e1 + std::sin(th) * std::sin(ph) * e2 + std::cos(th) * e3;
    };
    if (axial) {
      auto g = [&](double th) { return 2.0 * std::numbers::pi * std::sin(th) * ray(dir(th, 0.0), inner_tol); };
      return adaptive_quad(g, 0.0, std::numbers::pi, 1e-10 * scale).value;
    }
    auto g = [&](double th) {
      auto h = [&](double ph) { return ray(dir(th, ph), inner_tol); };
      return std::sin(th) * adaptive_quad(h, 0.0, 2.0 * std::numbers::pi, 1e-10 * scale).value;
    };
    return adaptive_quad(g, 0.0, std::numbers::pi, 1e-9 * scale).value;
  }
  throw Unsupported("kelvin_exit_time_check: quadrature implemented for d <= 3");
}

}  // namespace

AuditReport kelvin_exit_time_check(const StableParams& p, const BallSpec& ball, const std::vector<Point>& xs,
                                   double tol) {
  if (!(p.alpha < p.d)) throw DomainError("kelvin_exit_time_check: requires alpha < d");
  if (ball.center.dim() != p.d) throw DomainError("kelvin_exit_time_check: dimension mismatch");
  if (!(ball.center.norm() > ball.radius)) throw DomainError("kelvin_exit_time_check: 0 lies in the closed ball");
  if (p.d > 3) throw Unsupported("kelvin_exit_time_check: quadrature implemented for d <= 3");
  if (xs.empty()) throw DomainError("kelvin_exit_time_check: no sample points");
  const BallSpec tb = invert_ball(ball);
  const Point origin(p.d);
  AuditReport rep;
  rep.name = "kelvin-exit-time";
  rep.tolerance = tol;
  for (const Point& x : xs) {
    if (x.dim() != p.d || !(distance(x, ball.center) < ball.radius))
      throw DomainError("kelvin_exit_time_check: sample points must lie in the ball");
    const Point z = x * (1.0 / x.norm2());
    // Magnitude of the left side, used only to set absolute quadrature tolerances.
    const double scale = ball_exit_time(p, tb, z) * levy_density(p, origin, tb.center);
    const double lhs = kelvin_left_side(p, tb, z, scale);
    const double rhs = riesz_const(p, -p.alpha) * std::pow(x.norm(), p.d - p.alpha) * ball_exit_time(p, ball, x);
    rep.samples.push_back({flatten({&x}), lhs, rhs, lhs / rhs, 0.0});
    rep.worst_ratio = std::max(rep.worst_ratio, std::abs(lhs - rhs) / std::abs(rhs));
  }
  rep.checks.push_back({"max relative deviation", rep.worst_ratio, tol});
  rep.notes.push_back("worst_ratio is the maximum relative deviation between the two sides");
  return rep;
}

AuditReport markov_audit(const StableParams& p, const std::vector<MarkovCase>& cases, std::uint64_t walks,
                         const WalkConfig& cfg, const RngStream& rng) {
  if (cases.empty() || walks < 2) throw DomainError("markov_audit: empty budget");
  for (const auto& c : cases)
    if (!contains(c.U, c.x) || !contains(c.D, c.x))
      throw DomainError("markov_audit: case '" + c.label + "' starts outside U or D");
  AuditReport rep;
  rep.name = "markov";
  rep.tolerance = 3.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const WalkFunctionals direct = estimate_walk_functionals(p, c.D, c.x, c.payoff, walks, cfg, rng.split(2 * i));
    const WalkFunctionals staged =
        estimate_walk_functionals_two_stage(p, c.D, c.U, c.x, c.payoff, walks, cfg, rng.split(2 * i + 1));
    for (int k = 0; k < 2; ++k) {
      const MCEstimate& a = k == 0 ? direct.harmonic : direct.exit_time;
      const MCEstimate& b = k == 0 ? staged.harmonic : staged.exit_time;
      const double sigma = std::hypot(a.std_error, b.std_error);
      const double z = z_score(a.mean, b.mean, sigma);
      std::vector<double> conf = flatten({&c.x});
      conf.push_back(static_cast<double>(i));
      conf.push_back(static_cast<double>(k));
      rep.samples.push_back({conf, a.mean, b.mean, a.mean / b.mean, sigma});
      rep.worst_ratio = std::max(rep.worst_ratio, z);
    }
  }
  rep.checks.push_back({"max |direct - two-stage| / combined sigma", rep.worst_ratio, rep.tolerance});
  rep.notes.push_back("configuration = (x, case index, 0 harmonic | 1 exit time); worst_ratio is a z-score");
  return rep;
}

}  // namespace fracpot
