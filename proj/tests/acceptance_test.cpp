// Acceptance gate: runs the thirteen release criteria at full budgets and
// prints one PASS/FAIL line per criterion. Exit status 0 iff all pass.
//
// Usage: acceptance_test [--seed N] [--workers N] [--rerun-workers N]

#include <cstdlib>
#include <iostream>
#include <string>

#include "fracpot/selftest.hpp"

int main(int argc, char** argv) {
  fracpot::SuiteOptions opts;
  opts.scale = fracpot::SuiteScale::Full;
  opts.workers = 1;
  opts.rerun_workers = 3;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const auto value = std::strtoull(argv[i + 1], nullptr, 10);
    if (flag == "--seed") {
      opts.seed = value;
    } else if (flag == "--workers") {
      opts.workers = static_cast<int>(value);
    } else if (flag == "--rerun-workers") {
      opts.rerun_workers = static_cast<int>(value);
    } else {
      std::cerr << "unknown flag " << flag << '\n';
      return 1;
    }
  }
  const auto results = fracpot::run_acceptance_suite(opts);
  std::cout << fracpot::format_suite_table(results);
  const bool ok = fracpot::suite_passed(results);
  std::cout << (ok ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << '\n';
  return ok ? 0 : 1;
}
