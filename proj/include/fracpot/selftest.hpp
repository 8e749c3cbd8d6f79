#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fracpot {

/// Quick: deterministic criteria only. Reduced: every criterion at about a
/// tenth of the acceptance budgets. Full: acceptance budgets.
enum class SuiteScale { Quick, Reduced, Full };

struct SuiteOptions {
  SuiteScale scale = SuiteScale::Full;
  std::uint64_t seed = 0;
  int workers = 0;
  /// Worker count of the rerun used by the reproducibility criterion.
  int rerun_workers = 3;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool skipped = false;
  bool passed = false;
  std::string detail;
  /// Shortest round-trip serialization of every number the criterion produced.
  std::string digest;
  double seconds = 0.0;
};

/// Runs acceptance criterion `id` (1..12) at the given scale.
CriterionResult run_criterion(int id, const SuiteOptions& opts);

/// Runs criteria 1..12, then 13: the whole suite again with
/// opts.rerun_workers workers and a byte comparison of the digests.
std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& opts);

/// One "[PASS] ..." / "[FAIL] ..." / "[SKIP] ..." line per criterion.
std::string format_suite_table(const std::vector<CriterionResult>& results);

bool suite_passed(const std::vector<CriterionResult>& results);

}  // namespace fracpot
