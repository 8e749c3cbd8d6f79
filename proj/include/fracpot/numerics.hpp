#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fracpot {

/// Thrown when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown for configurations the toolkit deliberately does not handle.
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Integrand = std::function<double(double)>;

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int subdivisions = 1;
  // Set when the panel budget ran out before the tolerance was met.
  bool budget_exhausted = false;
};

double ln_gamma(double x);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b);

/// Inverse of reg_inc_beta in x.
double reg_inc_beta_inv(double p, double a, double b);

/// Globally adaptive 15-point Gauss-Kronrod quadrature on (a, b).
///
/// Nodes are interior to every panel, so integrable power singularities at
/// the end points are never evaluated. Panels are bisected worst-first until
/// the summed error estimate falls below `tol` or `max_panels` is reached.
QuadResult adaptive_quad(const Integrand& f, double a, double b, double tol,
                         int max_panels = 1 << 14);

/// Integral over (a, +inf), a > 0, mapped onto (0, 1] by t = a / u.
QuadResult adaptive_quad_to_infinity(const Integrand& f, double a, double tol,
                                     int max_panels = 1 << 14);

struct Finite {
  double value;
};
struct Divergent {
  double growth_exponent_estimate;
};
struct Undetermined {};

struct ProbeValue {
  double cutoff;
  double partial_integral;
};

/// Outcome of probing an integral singular at the lower limit.
struct DivergenceVerdict {
  std::variant<Finite, Divergent, Undetermined> kind;
  std::vector<ProbeValue> probe_values;

  bool is_finite() const { return std::holds_alternative<Finite>(kind); }
  bool is_divergent() const { return std::holds_alternative<Divergent>(kind); }
  bool is_undetermined() const { return std::holds_alternative<Undetermined>(kind); }
  std::string kind_name() const;
};

struct DivergenceOptions {
  double ratio_threshold = 0.5;
  double finite_tol = 1e-6;
  double quad_tol = 1e-12;
};

/// Cutoffs upper * ratio^k for k = 1..count.
std::vector<double> geometric_cutoffs(double upper, double ratio, int count);

/// Decides whether int_0^upper f diverges, from partial integrals over
/// [eps_k, upper] for the strictly decreasing cutoffs eps_k.
DivergenceVerdict divergence_probe(const Integrand& f, double upper,
                                   const std::vector<double>& cutoffs,
                                   const DivergenceOptions& opts = {});

/// Same decision rule applied to precomputed increments, where
/// increments[k] is the integral over [cutoffs[k], cutoffs[k-1]) and
/// cutoffs[-1] stands for the upper limit.
DivergenceVerdict divergence_from_increments(const std::vector<double>& cutoffs,
                                             const std::vector<double>& increments,
                                             const DivergenceOptions& opts = {});

}  // namespace fracpot
