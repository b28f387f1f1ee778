#pragma once

// Path-valued Markov chain on lattice paths: at each step the endpoint is
// erased or a fresh jump is appended, each with probability 1/2. The head
// values along an excursion of the lifetime walk are the locations of a
// random walk indexed by a uniform plane tree.

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "treerange/analytics.hpp"
#include "treerange/distributions.hpp"
#include "treerange/point.hpp"
#include "treerange/rng.hpp"
#include "treerange/stats.hpp"

namespace treerange::snake {

using distributions::JumpDistribution;
using stats::EstimateRecord;

// Snake state with lifetime zeta and path values w(j) for j <= zeta.
// Values below the initially materialized floor are drawn lazily as the
// reversed independent walk and memoized.
class SnakeState {
 public:
  enum class StepKind { kErase, kAppend };

  // Start with lifetime m; the initial path is distributed as the reversed
  // walk (-S_{m-k})_{k<=m}, drawn lazily as indices are first touched.
  SnakeState(const JumpDistribution& theta, std::int64_t m);

  std::int64_t zeta() const { return zeta_; }
  Point head() const { return path_.back(); }
  // Path value at index j <= zeta; extends the initial section on demand.
  Point value(std::int64_t j, RngStream& rng);
  // Value removed by the most recent erase step.
  Point last_erased() const { return last_erased_; }

  // One kernel step: erase or append with probability 1/2 each.
  StepKind step(RngStream& rng);
  // Deterministic-branch steps for fixture tests.
  void step_erase(RngStream& rng);
  void step_append(const Point& jump);

 private:
  void ensure_floor(std::int64_t j, RngStream& rng);

  const JumpDistribution* theta_;
  std::deque<Point> path_;  // values for indices [floor_, zeta_]
  std::int64_t zeta_ = 0;
  std::int64_t floor_ = 0;
  Point last_erased_{};
};

// Exact pmf of the reflected lifetime displacement X_k = zeta_k - 2 min zeta:
// P(X_k = m) = 2 (m+1)^2 / (k+m+2) * P_0(Y_k = m), with Y a simple walk.
// Throws DomainError on parity violation (k + m must be even, 0 <= m <= k).
double pitman_pmf(std::int64_t k, std::int64_t m);

// True iff sum_m P(X_k = m) equals 1 exactly in rational arithmetic.
bool pitman_normalization_exact(std::int64_t k);

// P(head at step k sits at the origin) = sum_m P(X_k = m) p_m(0).
double head_return_exact(const JumpDistribution& theta, std::int64_t k);
// Same, but with the return pmf supplied (lets callers reuse a long table).
double head_return_exact(const std::vector<double>& return_pmf, std::int64_t k);

// Monte Carlo survival of the head away from the origin up to step n
// (optionally stopped at tau_p, the first time zeta drops by p).
struct NoReturnHeadResult {
  EstimateRecord record;        // raw survival probability
  double log_scaled = 0.0;      // (log n) * estimate
};
NoReturnHeadResult estimate_no_return_head(const JumpDistribution& theta,
                                           std::int64_t n, std::int64_t reps,
                                           std::uint64_t seed,
                                           std::optional<std::int64_t> stop_p = {},
                                           int workers = 1);

// Lifetime contour and head values of the snake excursion of length 2n
// (uniform plane tree with n+1 vertices).
struct ExcursionSample {
  std::int64_t n = 0;
  std::vector<std::int32_t> zeta_path;  // 2n+1 values, starts/ends at 0
  std::vector<Point> head_path;         // aligned with zeta_path
};
ExcursionSample sample_excursion(std::int64_t n, const JumpDistribution& theta,
                                 RngStream& rng);
std::int64_t excursion_range(const ExcursionSample& sample);

// Distinct head count only (no stored paths), for large n.
std::int64_t sample_excursion_range(std::int64_t n, const JumpDistribution& theta,
                                    RngStream& rng);

// Free-snake range R_n = #{heads up to n}: mean and second moment of
// (log n / n) R_n over replicas.
struct FreeRangeResult {
  EstimateRecord record;      // mean of (log n / n) R_n
  double second_moment = 0.0;
  double variance = 0.0;
};
FreeRangeResult free_range(const JumpDistribution& theta, std::int64_t n,
                           std::int64_t reps, std::uint64_t seed,
                           int workers = 1);

// Conditional swap-symmetry check at step k given head return: compares the
// joint law of (depth below start, height above minimum) with its swap.
struct SymmetryCheckResult {
  std::int64_t hits = 0;
  stats::ChiSquareResult chi_square;      // (depth, height) swap test
  stats::ChiSquareResult arm_chi_square;  // first-increment swap test
};
SymmetryCheckResult symmetry_check(const JumpDistribution& theta, std::int64_t k,
                                   std::int64_t reps, std::uint64_t seed);

// Expected head returns to the origin before tau_m given the initial path,
// versus twice the Green sum along that path (identity check fixture).
struct HeadReturnsVsGreen {
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double green_sum_twice = 0.0;
  std::int64_t capped_runs = 0;
};
HeadReturnsVsGreen head_returns_vs_green(const JumpDistribution& theta,
                                         const analytics::GreenTable& table,
                                         std::int64_t m, std::int64_t reps,
                                         std::uint64_t seed,
                                         std::int64_t step_cap = 2000000);

}  // namespace treerange::snake
