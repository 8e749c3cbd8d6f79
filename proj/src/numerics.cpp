#include "fracpot/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/special_functions/beta.hpp>

namespace fracpot {

double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive");
  return std::lgamma(x);
}

double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("reg_inc_beta: x must lie in [0, 1]");
  if (!(a > 0.0 && b > 0.0)) throw DomainError("reg_inc_beta: shapes must be positive");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double reg_inc_beta_inv(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("reg_inc_beta_inv: p must lie in [0, 1]");
  if (!(a > 0.0 && b > 0.0)) throw DomainError("reg_inc_beta_inv: shapes must be positive");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  return boost::math::ibeta_inv(a, b, p);
}

namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  kronrod *= h;
  gauss *= h;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadResult adaptive_quad(const Integrand& f, double a, double b, double tol, int max_panels) {
  if (!(a < b)) throw DomainError("adaptive_quad: require a < b");
  std::priority_queue<Panel> heap;
  Panel first = gk15(f, a, b);
  heap.push(first);
  double value = first.value;
  double error = first.error;
  int panels = 1;
  constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
  while (error > std::max(tol, kRoundoff * std::abs(value)) && panels < max_panels) {
    Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // resolution limit
    heap.pop();
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the drift of the running updates.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {v, e, panels, e > std::max(tol, kRoundoff * std::abs(v))};
}

QuadResult adaptive_quad_to_infinity(const Integrand& f, double a, double tol, int max_panels) {
  if (!(a > 0.0)) throw DomainError("adaptive_quad_to_infinity: lower limit must be positive");
  auto mapped = [&](double u) {
    const double t = a / u;
    return f(t) * a / (u * u);
  };
  return adaptive_quad(mapped, 0.0, 1.0, tol, max_panels);
}

std::string DivergenceVerdict::kind_name() const {
  if (is_finite()) return "Finite";
  if (is_divergent()) return "Divergent";
  return "Undetermined";
}

std::vector<double> geometric_cutoffs(double upper, double ratio, int count) {
  std::vector<double> out;
  double eps = upper;
  for (int k = 0; k < count; ++k) {
    eps *= ratio;
    out.push_back(eps);
  }
  return out;
}

namespace {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

DivergenceVerdict divergence_from_increments(const std::vector<double>& cutoffs,
                                             const std::vector<double>& increments,
                                             const DivergenceOptions& opts) {
  DivergenceVerdict out{Undetermined{}, {}};
  const std::size_t n = std::min(cutoffs.size(), increments.size());
  double total = 0.0;
  std::vector<double> used;
  for (std::size_t k = 0; k < n; ++k) {
    const double inc = increments[k];
    if (!std::isfinite(inc) || !std::isfinite(cutoffs[k])) break;
    if (!out.probe_values.empty() && !(cutoffs[k] < out.probe_values.back().cutoff)) break;
    total += std::max(inc, 0.0);
    used.push_back(std::max(inc, 0.0));
    out.probe_values.push_back({cutoffs[k], total});
  }
  if (used.size() < 4) return out;

  const std::size_t m = used.size();
  const double d1 = used[m - 3], d2 = used[m - 2], d3 = used[m - 1];

  // Reference for "bounded away from zero": the first positive increment.
  double first = 0.0;
  for (double v : used) {
    if (v > 0.0) {
      first = v;
      break;
    }
  }

  // Growth of log-increments against -log(eps) over the tail.
  const std::size_t tail = std::min<std::size_t>(5, m);
  std::vector<double> lx, ly;
  for (std::size_t k = m - tail; k < m; ++k) {
    if (used[k] > 0.0) {
      lx.push_back(-std::log(out.probe_values[k].cutoff));
      ly.push_back(std::log(used[k]));
    }
  }
  const double log_slope = lx.size() >= 3 ? least_squares_slope(lx, ly) : 0.0;

  const double thr = opts.ratio_threshold * first;
  const bool bounded_away = first > 0.0 && d1 > thr && d2 > thr && d3 > thr;
  const bool growing = lx.size() >= 3 && log_slope > 0.0;
  if (bounded_away || growing) {
    std::vector<double> sx, sy;
    for (std::size_t k = m - 3; k < m; ++k) {
      sx.push_back(-std::log(out.probe_values[k].cutoff));
      sy.push_back(out.probe_values[k].partial_integral);
    }
    out.kind = Divergent{least_squares_slope(sx, sy)};
    return out;
  }

  const double limit = opts.finite_tol * total;
  if (d1 < limit && d2 < limit && d3 < limit && d1 >= d2 && d2 >= d3) {
    double value = total;
    if (d2 > 0.0) {
      const double q = d3 / d2;
      if (q < 1.0) value += d3 * q / (1.0 - q);
    }
    out.kind = Finite{value};
  }
  return out;
}

DivergenceVerdict divergence_probe(const Integrand& f, double upper, const std::vector<double>& cutoffs,
                                   const DivergenceOptions& opts) {
  std::vector<double> increments;
  double prev = upper;
  for (double eps : cutoffs) {
    if (!(eps < prev) || !(eps > 0.0)) break;
    const QuadResult q = adaptive_quad(f, eps, prev, opts.quad_tol);
    increments.push_back(q.value);
    prev = eps;
  }
  return divergence_from_increments(cutoffs, increments, opts);
}

}  // namespace fracpot
