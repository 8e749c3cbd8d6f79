#include "fracpot/commands.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>

#include "fracpot/analysis.hpp"
#include "fracpot/config.hpp"
#include "fracpot/selftest.hpp"

namespace fracpot {

namespace {

// Finite numbers stay JSON numbers (printed in shortest round-trip form);
// inf and nan become the same strings the CSV output uses.
Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json point_json(const Point& x) {
  Json a = Json::array();
  for (double c : x.coords()) a.push_back(num(c));
  return a;
}

Json estimate_json(const MCEstimate& e) {
  Json j = {{"mean", num(e.mean)},
            {"stderr", num(e.std_error)},
            {"n", e.n},
            {"censored_fraction", num(e.censored_fraction)},
            {"healthy", e.healthy},
            {"possibly_infinite", e.possibly_infinite}};
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string joined(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ' ';
    s += format_double(xs[i]);
  }
  return s;
}

// Output of a command: a table for CSV mode, a document for JSON mode.
struct Result {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  Json json = Json::object();
  int exit_code = kExitOk;

  void add_point_columns(const std::string& name, int d) {
    for (int i = 0; i < d; ++i) header.push_back(name + std::to_string(i));
  }
};

void append_point(std::vector<std::string>& row, const Point& x) {
  for (double c : x.coords()) row.push_back(format_double(c));
}

const std::vector<std::string> kEstimateColumns = {"mean", "stderr", "n", "censored_fraction"};

void append_estimate(std::vector<std::string>& row, const MCEstimate& e) {
  row.push_back(format_double(e.mean));
  row.push_back(format_double(e.std_error));
  row.push_back(std::to_string(e.n));
  row.push_back(format_double(e.censored_fraction));
}

struct Context {
  const CliOptions& opts;
  RunConfig rc;
  WalkConfig cfg;
  RngStream rng;

  const StableParams& p() const { return rc.params; }
  int d() const { return rc.params.d; }
  const DomainSpec& D() const { return *rc.domain; }
  const Json& doc() const { return rc.doc; }
  std::uint64_t walks() const { return rc.walks; }

  Point point(const std::string& key) const { return parse_point(require_field(doc(), key, ""), d(), key); }
  std::vector<Point> points(const std::string& key) const {
    return parse_points(require_field(doc(), key, ""), d(), key);
  }
  double number(const std::string& key) const { return get_number(doc(), key, ""); }
  double number_or(const std::string& key, double fallback) const { return get_number_or(doc(), key, fallback, ""); }
  std::uint64_t count_or(const std::string& key, std::uint64_t fallback) const {
    return get_count_or(doc(), key, fallback, "");
  }
};

void require_inside(const DomainSpec& D, const Point& x, const std::string& path) {
  if (!contains(D, x)) throw ConfigError(path + ": point lies outside the domain");
}

void require_all_inside(const DomainSpec& D, const std::vector<Point>& xs, const std::string& key) {
  for (std::size_t i = 0; i < xs.size(); ++i) require_inside(D, xs[i], key + "[" + std::to_string(i) + "]");
}

int health_code(bool healthy) { return healthy ? kExitOk : kExitUnhealthy; }

// ---------------------------------------------------------------------------
// Estimators

Result cmd_solve(Context& c) {
  const auto xs = c.points("points");
  require_all_inside(c.D(), xs, "points");
  const Payoff payoff = parse_payoff(require_field(c.doc(), "payoff", ""), c.p(), "payoff");
  Result r;
  r.add_point_columns("x", c.d());
  r.header.insert(r.header.end(), kEstimateColumns.begin(), kEstimateColumns.end());
  r.json["results"] = Json::array();
  bool healthy = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const MCEstimate e = estimate_harmonic_expectation(c.p(), c.D(), xs[i], payoff, c.walks(), c.cfg, c.rng.split(i));
    healthy = healthy && e.healthy;
    std::vector<std::string> row;
    append_point(row, xs[i]);
    append_estimate(row, e);
    r.rows.push_back(std::move(row));
    Json j = estimate_json(e);
    j["x"] = point_json(xs[i]);
    r.json["results"].push_back(j);
  }
  r.exit_code = health_code(healthy);
  return r;
}

Result cmd_exit_time(Context& c) {
  const auto xs = c.points("points");
  require_all_inside(c.D(), xs, "points");
  Result r;
  r.add_point_columns("x", c.d());
  r.header.insert(r.header.end(), kEstimateColumns.begin(), kEstimateColumns.end());
  r.json["results"] = Json::array();
  bool healthy = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const MCEstimate e = estimate_exit_time(c.p(), c.D(), xs[i], c.walks(), c.cfg, c.rng.split(i));
    healthy = healthy && e.healthy;
    std::vector<std::string> row;
    append_point(row, xs[i]);
    append_estimate(row, e);
    r.rows.push_back(std::move(row));
    Json j = estimate_json(e);
    j["x"] = point_json(xs[i]);
    r.json["results"].push_back(j);
  }
  r.exit_code = health_code(healthy);
  return r;
}

Result cmd_pkernel(Context& c) {
  const auto xs = c.points("points");
  const auto ys = c.points("targets");
  require_all_inside(c.D(), xs, "points");
  for (std::size_t j = 0; j < ys.size(); ++j)
    if (!(exterior_distance_lower_bound(c.D(), ys[j]) > 0.0))
      throw ConfigError("targets[" + std::to_string(j) + "]: target must lie at positive distance from the domain");
  Result r;
  r.add_point_columns("x", c.d());
  r.add_point_columns("y", c.d());
  r.header.insert(r.header.end(), kEstimateColumns.begin(), kEstimateColumns.end());
  r.json["results"] = Json::array();
  bool healthy = true;
  std::uint64_t k = 0;
  for (const Point& x : xs) {
    for (const Point& y : ys) {
      const MCEstimate e = estimate_poisson_kernel(c.p(), c.D(), x, y, c.walks(), c.cfg, c.rng.split(k++));
      healthy = healthy && e.healthy;
      std::vector<std::string> row;
      append_point(row, x);
      append_point(row, y);
      append_estimate(row, e);
      r.rows.push_back(std::move(row));
      Json j = estimate_json(e);
      j["x"] = point_json(x);
      j["y"] = point_json(y);
      r.json["results"].push_back(j);
    }
  }
  r.exit_code = health_code(healthy);
  return r;
}

Result cmd_green(Context& c) {
  const auto xs = c.points("points");
  const auto vs = c.points("poles");
  require_all_inside(c.D(), xs, "points");
  require_all_inside(c.D(), vs, "poles");
  if (!bounding_ball(c.D())) throw ConfigError("domain: the Green-function estimator needs a bounded domain");
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (const Point& v : vs)
      if (xs[i] == v) throw ConfigError("points[" + std::to_string(i) + "]: coincides with a pole");
  Result r;
  r.add_point_columns("x", c.d());
  r.add_point_columns("v", c.d());
  r.header.insert(r.header.end(), kEstimateColumns.begin(), kEstimateColumns.end());
  r.json["results"] = Json::array();
  bool healthy = true;
  std::uint64_t k = 0;
  for (const Point& x : xs) {
    for (const Point& v : vs) {
      const MCEstimate e = estimate_green(c.p(), c.D(), x, v, c.walks(), c.cfg, c.rng.split(k++));
      healthy = healthy && e.healthy;
      std::vector<std::string> row;
      append_point(row, x);
      append_point(row, v);
      append_estimate(row, e);
      r.rows.push_back(std::move(row));
      Json j = estimate_json(e);
      j["x"] = point_json(x);
      j["v"] = point_json(v);
      r.json["results"].push_back(j);
    }
  }
  r.exit_code = health_code(healthy);
  return r;
}

Result cmd_martin(Context& c) {
  const Point x = c.point("x");
  const Point x0 = c.point("x0");
  const Point y = c.point("y");
  require_inside(c.D(), x, "x");
  require_inside(c.D(), x0, "x0");
  if (contains(c.D(), y)) throw ConfigError("y: boundary point lies inside the domain");
  std::vector<double> radii = {0.1, 0.03, 0.01, 0.003, 0.001};
  if (c.doc().contains("radii")) {
    const Json& rj = c.doc().at("radii");
    if (!rj.is_array() || rj.empty()) throw ConfigError("radii: expected a non-empty array of numbers");
    radii.clear();
    for (std::size_t i = 0; i < rj.size(); ++i) {
      if (!rj[i].is_number() || !(rj[i].get<double>() > 0.0))
        throw ConfigError("radii[" + std::to_string(i) + "]: expected a positive number");
      radii.push_back(rj[i].get<double>());
    }
  }
  std::optional<Point> inward;
  if (c.doc().contains("inward")) inward = c.point("inward");

  const MartinEstimate m = estimate_martin_kernel(c.p(), c.D(), x, x0, y, radii, c.walks(), c.cfg, c.rng, inward);
  Result r;
  r.header = {"level", "radius"};
  r.add_point_columns("v", c.d());
  r.header.insert(r.header.end(), {"skipped", "ratio", "stderr", "selected"});
  Json levels = Json::array();
  for (std::size_t i = 0; i < m.levels.size(); ++i) {
    const MartinLevel& lv = m.levels[i];
    const bool selected = static_cast<int>(i) == m.selected_level;
    std::vector<std::string> row = {std::to_string(i), format_double(lv.radius)};
    append_point(row, lv.probe);
    row.push_back(lv.skipped ? "1" : "0");
    row.push_back(lv.skipped ? "" : format_double(lv.estimate.ratio));
    row.push_back(lv.skipped ? "" : format_double(lv.estimate.std_error));
    row.push_back(selected ? "1" : "0");
    r.rows.push_back(std::move(row));
    Json j = {{"radius", num(lv.radius)}, {"probe", point_json(lv.probe)}, {"skipped", lv.skipped}};
    if (!lv.skipped) {
      j["ratio"] = num(lv.estimate.ratio);
      j["stderr"] = num(lv.estimate.std_error);
    }
    levels.push_back(j);
  }
  r.json["levels"] = levels;
  r.json["selected_level"] = m.selected_level;
  r.json["value"] = num(m.value);
  r.json["stderr"] = num(m.std_error);
  r.json["notes"] = m.notes;
  r.exit_code = health_code(m.selected_level >= 0 && std::isfinite(m.value));
  return r;
}

// ---------------------------------------------------------------------------
// Classification

Json evidence_json(const DivergenceVerdict& v) {
  Json j = {{"kind", v.kind_name()}};
  if (const auto* f = std::get_if<Finite>(&v.kind)) j["value"] = num(f->value);
  if (const auto* g = std::get_if<Divergent>(&v.kind)) j["growth_exponent"] = num(g->growth_exponent_estimate);
  Json probes = Json::array();
  for (const auto& pv : v.probe_values) probes.push_back({num(pv.cutoff), num(pv.partial_integral)});
  j["probe_values"] = probes;
  return j;
}

Result cmd_classify(Context& c) {
  const Json& target = require_field(c.doc(), "point", "");
  Classification cl;
  if (target.is_string()) {
    if (target.get<std::string>() != "infinity") throw ConfigError("point: expected a point or \"infinity\"");
    const Point probe = c.point("probe");
    require_inside(c.D(), probe, "probe");
    if (bounding_ball(c.D())) throw ConfigError("point: infinity is not a boundary point of a bounded domain");
    InfinityBudget b;
    b.initial_walks = c.count_or("initial_walks", b.initial_walks);
    b.levels = static_cast<int>(c.count_or("levels", static_cast<std::uint64_t>(b.levels)));
    cl = classify_infinity(c.p(), c.D(), probe, b, c.cfg, c.rng);
  } else {
    const Point y = parse_point(target, c.d(), "point");
    if (contains(c.D(), y)) throw ConfigError("point: boundary point lies inside the domain");
    ShellBudget b;
    b.shells = static_cast<int>(c.count_or("shells", static_cast<std::uint64_t>(b.shells)));
    b.lattice_points = static_cast<int>(c.count_or("lattice_points", static_cast<std::uint64_t>(b.lattice_points)));
    b.walks_per_point = c.count_or("walks_per_point", b.walks_per_point);
    cl = classify_boundary_point(c.p(), c.D(), y, b, c.cfg, c.rng);
  }
  Result r;
  r.header = {"verdict", "method", "I_f", "evidence", "note"};
  r.rows.push_back({verdict_name(cl.verdict), cl.method, cl.integral ? format_double(*cl.integral) : "",
                    cl.evidence.kind_name(), cl.note});
  r.json["verdict"] = verdict_name(cl.verdict);
  r.json["method"] = cl.method;
  r.json["point"] = cl.boundary_point.is_infinity() ? Json("infinity") : point_json(cl.boundary_point.finite());
  r.json["I_f"] = cl.integral ? num(*cl.integral) : Json(nullptr);
  r.json["evidence"] = evidence_json(cl.evidence);
  Json levels = Json::array();
  for (const auto& lv : cl.levels) {
    Json j = estimate_json(lv.estimate);
    j["walks"] = lv.walks;
    levels.push_back(j);
  }
  r.json["levels"] = levels;
  r.json["note"] = cl.note;
  r.exit_code = cl.verdict == Verdict::Undetermined ? kExitUndetermined : kExitOk;
  return r;
}

// ---------------------------------------------------------------------------
// Audits

Result audit_result(const AuditReport& a) {
  Result r;
  r.header = {"kind", "label", "configuration", "lhs", "rhs", "ratio", "stderr", "value", "limit", "ok"};
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const AuditSample& s = a.samples[i];
    r.rows.push_back({"sample", std::to_string(i), joined(s.configuration), format_double(s.lhs),
                      format_double(s.rhs), format_double(s.ratio), format_double(s.std_error), "", "", ""});
  }
  for (const AuditCheck& ck : a.checks)
    r.rows.push_back({"check", ck.label, "", "", "", "", "", format_double(ck.value), format_double(ck.limit),
                      ck.ok() ? "1" : "0"});
  Json samples = Json::array();
  for (const auto& s : a.samples) {
    Json conf = Json::array();
    for (double v : s.configuration) conf.push_back(num(v));
    samples.push_back({{"configuration", conf},
                       {"lhs", num(s.lhs)},
                       {"rhs", num(s.rhs)},
                       {"ratio", num(s.ratio)},
                       {"stderr", num(s.std_error)}});
  }
  Json checks = Json::array();
  for (const auto& ck : a.checks)
    checks.push_back({{"label", ck.label}, {"value", num(ck.value)}, {"limit", num(ck.limit)}, {"ok", ck.ok()}});
  r.json = {{"audit", a.name},         {"passed", a.passed()}, {"worst_ratio", num(a.worst_ratio)},
            {"tolerance", num(a.tolerance)}, {"samples", samples},   {"checks", checks},
            {"notes", a.notes}};
  r.exit_code = a.passed() ? kExitOk : kExitUnhealthy;
  return r;
}

BallSpec ball_domain(const Context& c) {
  const Json& dom = c.doc().at("domain");
  if (!dom.is_object() || dom.value("kind", "") != "ball") throw ConfigError("domain.kind: this audit needs a ball");
  return *bounding_ball(c.D());
}

Result cmd_audit(Context& c, const std::string& name) {
  if (name == "bhp") {
    const double rr = c.number_or("r", 1.0);
    if (!(rr > 0.0)) throw ConfigError("r: must be positive");
    const int configs = static_cast<int>(c.count_or("configs", 6));
    return audit_result(bhp_audit(c.p(), c.D(), rr, configs, c.walks(), c.cfg, c.rng));
  }
  if (name == "factorization") {
    const Point y = c.point("y");
    const double p_cut = c.number("p_cut");
    const auto xs = c.points("points");
    require_all_inside(c.D(), xs, "points");
    const int lattice = static_cast<int>(c.count_or("lattice_points", 256));
    return audit_result(factorization_audit(c.p(), c.D(), y, p_cut, xs, c.walks(), c.cfg, c.rng, lattice));
  }
  if (name == "harnack") {
    const Point center = c.point("center");
    const double rr = c.number("r"), s = c.number("s");
    const Point y = c.point("y");
    require_inside(c.D(), center, "center");
    const int pairs = static_cast<int>(c.count_or("pairs", 8));
    return audit_result(harnack_audit(c.p(), c.D(), center, rr, s, y, pairs, c.walks(), c.cfg, c.rng));
  }
  if (name == "kelvin-green") {
    const BallSpec b = ball_domain(c);
    const int pairs = static_cast<int>(c.count_or("pairs", 100));
    return audit_result(kelvin_green_check(c.p(), b, pairs, c.number_or("tol", 1e-9), c.rng));
  }
  if (name == "kelvin-exit-time") {
    const BallSpec b = ball_domain(c);
    const auto xs = c.points("points");
    require_all_inside(c.D(), xs, "points");
    return audit_result(kelvin_exit_time_check(c.p(), b, xs, c.number_or("tol", 1e-6)));
  }
  if (name == "markov") {
    const Json& cj = require_field(c.doc(), "cases", "");
    if (!cj.is_array() || cj.empty()) throw ConfigError("cases: expected a non-empty array");
    std::vector<MarkovCase> cases;
    for (std::size_t i = 0; i < cj.size(); ++i) {
      const std::string path = "cases[" + std::to_string(i) + "]";
      MarkovCase mc{cj[i].value("label", path), c.D(),
                    parse_domain(require_field(cj[i], "U", path), c.d(), path + ".U"),
                    parse_point(require_field(cj[i], "x", path), c.d(), path + ".x"),
                    parse_payoff(require_field(cj[i], "payoff", path), c.p(), path + ".payoff")};
      require_inside(mc.U, mc.x, path + ".x");
      require_inside(c.D(), mc.x, path + ".x");
      cases.push_back(std::move(mc));
    }
    return audit_result(markov_audit(c.p(), cases, c.walks(), c.cfg, c.rng));
  }
  throw ConfigError("audit: unknown audit '" + name +
                    "' (expected bhp, factorization, harnack, kelvin-green, kelvin-exit-time or markov)");
}

// ---------------------------------------------------------------------------

Json metadata(const CliOptions& o, const RunConfig& rc) {
  std::string command = o.command;
  if (o.command == "audit") command += " " + o.audit;
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"seed", o.seed},
          {"d", rc.params.d},
          {"alpha", num(rc.params.alpha)},
          {"domain_hash", rc.domain_hash},
          {"walks", rc.walks}};
}

void emit(const CliOptions& o, const Json& meta, const Result& r, std::ostream& out) {
  if (o.json) {
    Json doc = {{"meta", meta}, {"result", r.json}};
    out << doc.dump(2) << '\n';
    return;
  }
  out << '#' << meta.dump() << '\n';
  for (std::size_t i = 0; i < r.header.size(); ++i) out << (i ? "," : "") << csv_cell(r.header[i]);
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

int cmd_selftest(const CliOptions& o, std::ostream& out) {
  SuiteOptions so;
  so.scale = o.quick ? SuiteScale::Quick : o.full ? SuiteScale::Full : SuiteScale::Reduced;
  so.seed = o.seed;
  so.workers = o.workers;
  std::vector<CriterionResult> results;
  if (o.full) {
    results = run_acceptance_suite(so);
  } else {
    for (int id = 1; id <= 12; ++id) results.push_back(run_criterion(id, so));
  }
  out << format_suite_table(results);
  const bool ok = suite_passed(results);
  out << (ok ? "selftest passed" : "selftest FAILED") << '\n';
  return ok ? kExitOk : kExitUnhealthy;
}

}  // namespace

int workers_from_environment(std::optional<int> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FRACPOT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return static_cast<int>(v);
  }
  return 0;
}

int run_command(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  struct PerturbGuard {
    double saved = testing::poisson_const_perturbation();
    ~PerturbGuard() { testing::set_poisson_const_perturbation(saved); }
  } guard;
  if (opts.perturb_poisson_const) testing::set_poisson_const_perturbation(*opts.perturb_poisson_const);

  if (opts.command == "selftest") return cmd_selftest(opts, out);

  using Handler = std::function<Result(Context&)>;
  const std::map<std::string, Handler> handlers = {
      {"solve", cmd_solve},
      {"exit-time", cmd_exit_time},
      {"pkernel", cmd_pkernel},
      {"green", cmd_green},
      {"martin", cmd_martin},
      {"classify", cmd_classify},
      {"audit", [&](Context& c) { return cmd_audit(c, opts.audit); }},
  };
  const auto it = handlers.find(opts.command);
  if (it == handlers.end()) {
    err << "error: unknown command '" << opts.command << "'\n";
    return kExitUsage;
  }
  try {
    if (opts.config.empty()) throw ConfigError("--config: a configuration file is required");
    RunConfig rc = parse_run_config(load_config_file(opts.config));
    if (opts.walks) rc.walks = *opts.walks;
    WalkConfig cfg = rc.walk;
    cfg.workers = opts.workers;
    Context ctx{opts, rc, cfg, RngStream(opts.seed, 0)};
    const Result r = it->second(ctx);
    emit(opts, metadata(opts, rc), r, out);
    return r.exit_code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const Unsupported& e) {
    err << "error: unsupported: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace fracpot
