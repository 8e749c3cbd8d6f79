// Command-line front end: estimators, classification and audits for the
// fractional Laplacian, driven by a JSON configuration document.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fracpot/commands.hpp"

int main(int argc, char** argv) {
  using namespace fracpot;

  CLI::App app{"Potential theory of the fractional Laplacian: exact walk-on-spheres estimators and audits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CliOptions opts;
  std::string out_path;
  std::optional<int> workers;
  std::uint64_t walks = 0;
  double perturb = 1.0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config, "JSON configuration document");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "64-bit seed (default 0)");
    sub->add_option("--walks", walks, "walk budget per estimate (overrides the document)")->check(CLI::PositiveNumber);
    sub->add_option("--workers", workers, "worker threads (default: FRACPOT_WORKERS, else all cores)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out_path, "output file (default standard output)");
    sub->add_flag("--json", opts.json, "emit a JSON document instead of CSV");
    sub->add_option("--perturb-poisson-const", perturb, "test hook: multiply the Poisson constant")->group("");
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "harmonic-measure expectation of a payoff"},
      {"pkernel", "Poisson kernel by the collision estimator"},
      {"exit-time", "expected exit time"},
      {"green", "Green function"},
      {"martin", "Martin kernel by Green-function ratios"},
      {"classify", "accessibility of a boundary point or of infinity"},
  };
  for (const auto& [name, help] : commands) common(app.add_subcommand(name, help), true);

  auto* audit = app.add_subcommand("audit", "run a named audit");
  common(audit, true);
  audit->add_option("name", opts.audit, "audit name")
      ->required()
      ->check(CLI::IsMember({"bhp", "factorization", "harnack", "kelvin-green", "kelvin-exit-time", "markov"}));

  auto* selftest = app.add_subcommand("selftest", "closed-form checks plus a reduced statistical suite");
  common(selftest, false);
  selftest->add_flag("--quick", opts.quick, "deterministic checks only");
  selftest->add_flag("--full", opts.full, "acceptance budgets, including the worker-count rerun");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  opts.command = app.get_subcommands().front()->get_name();
  if (walks > 0) opts.walks = walks;
  opts.workers = workers_from_environment(workers);
  if (perturb != 1.0) opts.perturb_poisson_const = perturb;

  if (out_path.empty()) return run_command(opts, std::cout, std::cerr);
  std::ofstream file(out_path);
  if (!file) {
    std::cerr << "error: --out: cannot open " << out_path << '\n';
    return kExitUsage;
  }
  return run_command(opts, file, std::cerr);
}
