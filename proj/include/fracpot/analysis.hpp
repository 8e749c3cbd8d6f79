#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracpot/geometry.hpp"
#include "fracpot/kernels.hpp"
#include "fracpot/numerics.hpp"
#include "fracpot/rng.hpp"
#include "fracpot/sampler.hpp"

namespace fracpot {

enum class Verdict { Accessible, Inaccessible, Undetermined };

const char* verdict_name(Verdict v);

/// One budget level of the exit-time probe used for the point at infinity.
struct BudgetLevel {
  std::uint64_t walks = 0;
  MCEstimate estimate;
};

struct Classification {
  Verdict verdict = Verdict::Undetermined;
  ExtendedPoint boundary_point = ExtendedPoint::infinity();
  /// "analytic", "shells" or "budget-growth".
  std::string method;
  /// Divergence evidence (analytic integrand probe or shell sums).
  DivergenceVerdict evidence;
  /// The thorn integral I_f when it is finite and known in closed form.
  std::optional<double> integral;
  /// Budget trace, for the point at infinity.
  std::vector<BudgetLevel> levels;
  std::string note;
};

/// Accessibility of the apex of the thorn {0 < x_1 < 1, |x'| < width_scale x_1^gamma}:
/// inaccessible iff I_f = int_0^1 t^{-d-alpha} f(t)^{d+alpha-1} dt is finite, iff gamma > 1.
/// The decision is analytic; a numeric divergence probe of I_f is attached as evidence.
Classification thorn_integral_test(const StableParams& p, double gamma, double width_scale = 1.0);

/// Accessibility of the vertex of the cusp {y > |x|^gamma}, d = 2, through the
/// reduction to a thorn with exponent 1/gamma.
Classification cusp_vertex_test(const StableParams& p, double gamma);

struct ShellBudget {
  int shells = 12;                      // dyadic shells 2^{-k-1} <= |v - y| < 2^{-k}, k = 0..shells-1
  int lattice_points = 64;              // lattice points per shell cube
  std::uint64_t walks_per_point = 256;  // walks per exit-time estimate
};

/// Probes Lambda = int_{D cap B(y,1)} s_{D cap B(y,1)}(v) nu(v, y) dv shell by shell.
/// Thorn and cusp apexes are decided analytically.
Classification classify_boundary_point(const StableParams& p, const DomainSpec& D, const Point& y,
                                       const ShellBudget& budget, const WalkConfig& cfg, const RngStream& rng);

struct InfinityBudget {
  std::uint64_t initial_walks = 1000;
  int levels = 4;  // budgets initial_walks * 4^j
};

/// Accessibility of infinity for unbounded D: s_D(x_probe) = infinity.
Classification classify_infinity(const StableParams& p, const DomainSpec& D, const Point& x_probe,
                                 const InfinityBudget& budget, const WalkConfig& cfg, const RngStream& rng);

struct MartinLevel {
  double radius = 0.0;
  Point probe;
  bool skipped = false;
  RatioEstimate estimate;
};

struct MartinEstimate {
  std::vector<MartinLevel> levels;
  int selected_level = -1;  // index into levels
  double value = 0.0;
  /// Monte Carlo error of the selected level combined with the change from the
  /// previous used level (a truncation proxy).
  double std_error = 0.0;
  std::vector<std::string> notes;
};

/// G_D(x, v_j) / G_D(x0, v_j) along v_j = y + radii_j * inward, radii decreasing.
/// `inward` defaults to the direction from y to the bounding-ball center
/// (or to x0 when D is not a ball).
MartinEstimate estimate_martin_kernel(const StableParams& p, const DomainSpec& D, const Point& x, const Point& x0,
                                      const Point& y, const std::vector<double>& radii, std::uint64_t n,
                                      const WalkConfig& cfg, const RngStream& rng,
                                      std::optional<Point> inward = std::nullopt);

struct AuditSample {
  std::vector<double> configuration;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;
};

/// A named inequality value <= limit; fails when value is not finite.
struct AuditCheck {
  std::string label;
  double value = 0.0;
  double limit = 0.0;

  bool ok() const;
};

struct AuditReport {
  std::string name;
  std::vector<AuditSample> samples;
  double worst_ratio = 0.0;
  double tolerance = 0.0;
  std::vector<AuditCheck> checks;
  std::vector<std::string> notes;

  /// True iff every check holds. The first check compares worst_ratio (or its
  /// statistically slackened form) with tolerance.
  bool passed() const;
};

/// Cross-ratio rho = P(x1,y1) P(x2,y2) / (P(x1,y2) P(x2,y1)) over random
/// quadruples with x in D cap B(0, r/2) and y in D^c outside B(0, r).
/// Runs budget n and 4n (nested) and checks the worst configuration moves by
/// less than 2 combined standard errors; on a ball each rho is also compared
/// with the closed form.
AuditReport bhp_audit(const StableParams& p, const DomainSpec& D, double r, int n_config, std::uint64_t walks,
                      const WalkConfig& cfg, const RngStream& rng);

/// P_D(x, y) / (Lambda s_D(x)) over the sample points x in D cap B(0, p_cut),
/// with Lambda = nu(0, y) + int_{D \ B_p} P_D(z, y) nu(0, z) dz on a lattice.
AuditReport factorization_audit(const StableParams& p, const DomainSpec& D, const Point& y, double p_cut,
                                const std::vector<Point>& xs, std::uint64_t walks, const WalkConfig& cfg,
                                const RngStream& rng, int lattice_points = 256);

/// P_D(x1, y) <= ((1 + r/s) / (1 - r/s))^d P_D(x2, y) for pairs in B(c, r), B(c, s) inside D.
AuditReport harnack_audit(const StableParams& p, const DomainSpec& D, const Point& center, double r, double s,
                          const Point& y, int pairs, std::uint64_t walks, const WalkConfig& cfg,
                          const RngStream& rng);

/// G_B(x, v) = |x|^{alpha-d} |v|^{alpha-d} G_{TB}(Tx, Tv) on random pairs, closed form on both sides.
AuditReport kelvin_green_check(const StableParams& p, const BallSpec& ball, int pairs, double tol,
                               const RngStream& rng);

/// int_{TB} G_{TB}(Tx, y) nu(0, y) dy = A_{d,-alpha} |x|^{d-alpha} s_B(x), left side by quadrature.
AuditReport kelvin_exit_time_check(const StableParams& p, const BallSpec& ball, const std::vector<Point>& xs,
                                   double tol);

/// One configuration of the strong-Markov composition check.
struct MarkovCase {
  std::string label;
  DomainSpec D;
  DomainSpec U;  // U inside D
  Point x;
  Payoff payoff;
};

/// Direct versus two-stage (exit U, then restart in D) harmonic expectation
/// and exit time; agreement within 3 combined standard errors.
AuditReport markov_audit(const StableParams& p, const std::vector<MarkovCase>& cases, std::uint64_t walks,
                         const WalkConfig& cfg, const RngStream& rng);

/// Points of the Kronecker (R_d) sequence in the unit cube, j = 1..count.
std::vector<Point> kronecker_lattice(int d, int count);

}  // namespace fracpot
