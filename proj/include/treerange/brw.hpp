#pragma once

// Branching random walk: generation-synchronous population dynamics with a
// cumulative visited-set, total-progeny law, and the hitting-time limit law.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "treerange/distributions.hpp"
#include "treerange/point.hpp"
#include "treerange/rng.hpp"
#include "treerange/stats.hpp"

namespace treerange::brw {

using distributions::JumpDistribution;
using distributions::OffspringDistribution;
using stats::EstimateRecord;

// Population state: lattice point -> particle count (strictly positive).
struct PointMeasure {
  std::vector<std::pair<Point, std::int64_t>> counts;
  std::int64_t total = 0;
};

PointMeasure point_measure_at_origin(int dim, std::int64_t particles);

// One generation: every particle draws an offspring count and each offspring
// displaces by an independent jump.
PointMeasure brw_step(const PointMeasure& state, const OffspringDistribution& mu,
                      const JumpDistribution& theta, RngStream& rng);

struct BrwRunResult {
  std::int64_t range = 0;      // distinct sites ever occupied
  std::int64_t progeny = 0;    // total particles over all generations
  std::int64_t generations = 0;
  bool truncated = false;      // hit the progeny cap
};

// Run to extinction or to progeny_cap. track_range=false skips the
// visited-set (progeny statistics only).
BrwRunResult brw_run(std::int64_t p, const OffspringDistribution& mu,
                     const JumpDistribution& theta, RngStream& rng,
                     std::int64_t progeny_cap = 100000000,
                     bool track_range = true,
                     const std::vector<Point>* initial_positions = nullptr);

// CDF of the hitting-time limit J (density (2 pi s^3)^{-1/2} e^{-1/(2s)}).
double j_cdf(double s);
// CDF of J scaled by 1/sigma_mu^2 (the progeny limit of N/p^2).
double scaled_j_cdf(double s, double sigma_mu2);

// Per-replica (R/N, N/p^2) samples plus truncation accounting.
struct RatioExperimentResult {
  std::vector<double> r_over_n;   // untruncated replicas only
  std::vector<double> n_over_p2;  // all replicas; truncated entries = +inf
  std::int64_t truncated = 0;
  std::vector<BrwRunResult> runs;
};
RatioExperimentResult ratio_experiment(std::int64_t p,
                                       const OffspringDistribution& mu,
                                       const JumpDistribution& theta,
                                       std::int64_t reps, std::uint64_t seed,
                                       std::int64_t progeny_cap = 100000000,
                                       bool track_range = true, int workers = 1);

// Exact law of the total progeny for one initial particle: P(N = k) for
// k = 1..kmax via the killed increment-walk, plus the tail mass.
std::vector<double> progeny_pmf_exact(const OffspringDistribution& mu,
                                      std::int64_t p, std::int64_t kmax);

}  // namespace treerange::brw
