#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace fracpot {

inline constexpr const char* kToolName = "fracpot";
inline constexpr const char* kToolVersion = "1.0.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitUnhealthy = 2, kExitUndetermined = 3 };

struct CliOptions {
  std::string command;  // solve, pkernel, exit-time, green, martin, classify, audit, selftest
  std::string audit;    // audit name when command == "audit"
  std::string config;   // path of the JSON configuration document
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> walks;  // overrides the document's "walks"
  int workers = 0;                     // 0 = available parallelism
  bool json = false;
  bool quick = false;
  bool full = false;                          // selftest at acceptance budgets
  std::optional<double> perturb_poisson_const;  // test hook: multiplies C_{d,alpha}
};

/// Worker count from the flag, else the FRACPOT_WORKERS environment variable, else 0.
int workers_from_environment(std::optional<int> flag);

/// Runs one command. Results go to `out`, diagnostics to `err`; returns an ExitCode.
int run_command(const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace fracpot
