#pragma once

// Named verification checks mirroring the acceptance suite: exact identities,
// deterministic limit tables, statistical invariance, estimator consistency
// and the population-law comparisons. `fast` keeps to the sub-minute subset.

#include <cstdint>
#include <string>
#include <vector>

namespace treerange::verify {

enum class Level { kFast, kFull };

struct CheckResult {
  std::string id;
  bool pass = false;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string note;
  double elapsed_ms = 0.0;

  std::string to_json() const;
};

std::vector<CheckResult> run_checks(Level level, int workers,
                                    std::uint64_t seed);

// Individual check groups (exposed for the acceptance suite).
std::vector<CheckResult> exact_identity_checks(std::int64_t kemperman_m,
                                               std::int64_t kemperman_k,
                                               std::int64_t pitman_enum_k,
                                               std::int64_t pitman_norm_k,
                                               std::uint64_t seed);
CheckResult head_return_visit_limit(std::uint64_t seed);  // deterministic DP
CheckResult green_asymptotic_check();
std::vector<CheckResult> invariance_checks(std::int64_t samples,
                                           std::uint64_t seed, int workers);
std::vector<CheckResult> constant_consistency_checks(std::uint64_t seed,
                                                     int workers);
std::vector<CheckResult> critical_dimension_checks(std::uint64_t seed,
                                                   int workers,
                                                   bool full_scale);
std::vector<CheckResult> brw_law_checks(std::uint64_t seed, int workers);
std::vector<CheckResult> suffcond_checks(std::uint64_t seed, int workers);
CheckResult green_negative_control();

}  // namespace treerange::verify
