#pragma once

// The invariant infinite tree: an infinite spine of vertices 0, -1, -2, ...
// with a full Galton-Watson tree hanging at 0 and tail-distributed child
// counts below, the re-rooting shift on finite encodings, the lexicographic
// range process, and the estimators of the linear-growth constant.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "treerange/analytics.hpp"
#include "treerange/distributions.hpp"
#include "treerange/point.hpp"
#include "treerange/rng.hpp"
#include "treerange/stats.hpp"
#include "treerange/trees.hpp"

namespace treerange::spine {

using distributions::JumpDistribution;
using distributions::OffspringDistribution;
using stats::EstimateRecord;
using trees::PlaneTree;

// Finite encoding of the infinite tree: subtrees hung on spine vertices
// 0, -1, ..., -(J-1), with per-vertex locations aligned to preorder.
// trees[0] is a full GW tree; deeper roots have tail-distributed child
// counts. locations[i][0] is the location of spine vertex -i.
struct SpinePrefix {
  std::vector<PlaneTree> trees;
  std::vector<std::vector<Point>> locations;
  int dim = 0;

  std::int64_t non_spine_vertices() const {
    std::int64_t n = 0;
    for (const auto& t : trees) n += static_cast<std::int64_t>(t.size()) - 1;
    return n;
  }
};

// Sample a prefix with at least `min_subtrees` spine subtrees and at least
// `min_non_spine` encoded non-spine vertices.
SpinePrefix sample_spine_prefix(const OffspringDistribution& mu,
                                const JumpDistribution& theta, RngStream& rng,
                                std::int64_t min_subtrees,
                                std::int64_t min_non_spine = 0,
                                std::int64_t size_cap = 1000000000);

// Re-root at the first non-spine vertex in lexicographic order, shifting all
// locations so the new root sits at the origin. Throws InsufficientPrefix
// when the encoded portion has no non-spine vertex.
SpinePrefix shift_tau(const SpinePrefix& prefix);

// Locations of the root and the non-spine vertices in lexicographic order,
// up to n entries (fewer if the encoding runs out).
std::vector<Point> enumerate_locations(const SpinePrefix& prefix, std::int64_t n);

// Lazy single-consumer stream over (root, u_1, u_2, ...) locations under the
// invariant spatial law; memory stays O(current subtree depth).
class SpineWalkStream {
 public:
  SpineWalkStream(const OffspringDistribution& mu, const JumpDistribution& theta,
                  RngStream& rng);

  // Location of the next vertex in lexicographic order (first call: root).
  Point next();
  std::int64_t emitted() const { return emitted_; }

 private:
  struct Frame {
    Point loc;
    std::int32_t remaining;
  };

  const OffspringDistribution* mu_;
  const JumpDistribution* theta_;
  RngStream* rng_;
  std::vector<Frame> stack_;
  Point spine_loc_;
  std::int64_t emitted_ = 0;
  bool root_emitted_ = false;
};

// Range trace R_1..R_n sampled at checkpoints.
struct RangeTrace {
  std::int64_t n = 0;
  std::vector<std::int64_t> checkpoints;
  std::vector<std::int64_t> r_values;
  double r_over_n = 0.0;
  std::uint64_t seed = 0;
};
RangeTrace range_process(const OffspringDistribution& mu,
                         const JumpDistribution& theta, std::int64_t n,
                         const std::vector<std::int64_t>& checkpoints,
                         std::uint64_t seed, std::uint64_t replica);

// Mean of R_n/n over replicas: the range-based estimator of the constant.
EstimateRecord estimate_infinite_range(const OffspringDistribution& mu,
                                       const JumpDistribution& theta,
                                       std::int64_t n, std::int64_t reps,
                                       std::uint64_t seed, int workers = 1);

// P(z_{u_j} != 0 for all 1 <= j <= horizon), the no-return estimator.
EstimateRecord estimate_no_return(const OffspringDistribution& mu,
                                  const JumpDistribution& theta,
                                  std::int64_t horizon, std::int64_t reps,
                                  std::uint64_t seed, int workers = 1);

// Avoidance probabilities over unconditioned spatial GW trees.
// a: no non-root vertex at the origin. h(y): no vertex at -y.
struct AvoidanceResult {
  EstimateRecord record;
  std::int64_t truncated = 0;  // replicas that hit the size cap (excluded)
};
AvoidanceResult estimate_a(const OffspringDistribution& mu,
                           const JumpDistribution& theta, std::int64_t reps,
                           std::uint64_t seed, std::int64_t size_cap = 100000000,
                           int workers = 1);
AvoidanceResult estimate_h(const OffspringDistribution& mu,
                           const JumpDistribution& theta, const Point& y,
                           std::int64_t reps, std::uint64_t seed,
                           std::int64_t size_cap = 100000000, int workers = 1);

// h on a whole box from one batch of tree samples: h(y) is the fraction of
// sampled trees that never visit -y. Outside the box three models are
// offered: the hard bounds h = (1 - G)+ and h = 1, and an extrapolation
// 1 - h(y) = G(-y)/kappa where kappa (expected visits per hitting tree,
// E[N] = G exactly at criticality) is pooled over the boundary shell.
class HTable {
 public:
  enum class FarField { kLowerBound, kModel, kUpperBound };

  HTable(const OffspringDistribution& mu, const JumpDistribution& theta,
         std::int32_t radius, std::int64_t reps, std::uint64_t seed,
         std::int64_t size_cap = 100000000);

  double at(const Point& y, FarField mode = FarField::kModel) const;
  std::int32_t radius() const { return radius_; }
  std::int64_t truncated() const { return truncated_; }
  double kappa() const { return kappa_; }
  // Must be attached before far-field evaluation.
  void attach_green(const analytics::GreenTable* green);

 private:
  int dim_;
  std::int32_t radius_;
  std::int64_t reps_ = 0;
  std::int64_t truncated_ = 0;
  std::vector<double> visited_counts_;  // count of trees visiting -y
  double kappa_ = 1.0;
  const analytics::GreenTable* green_ = nullptr;
};

// Product-formula estimator: a * E[prod_{j=1}^{j_max} Phi(-S_j)] with
// Phi(x) = (1 - g_mu(q)) / (1 - q), q = sum_y theta(y) h(x + y).
// The product is evaluated under all three far-field models; the hard-bound
// products bracket the truth and their half-width enters the uncertainty.
struct ConstantFormulaResult {
  EstimateRecord record;       // the combined estimate of the constant
  double a_estimate = 0.0;
  double a_stderr = 0.0;
  double product_mean = 0.0;   // extrapolated far field
  double product_stderr = 0.0;
  double product_lower = 0.0;  // far field at the Green lower bound
  double product_upper = 0.0;  // far field at h = 1
  double truncation_remainder = 0.0;  // estimated log-product tail beyond j_max
};
ConstantFormulaResult estimate_c_formula(const OffspringDistribution& mu,
                                         const JumpDistribution& theta,
                                         std::int64_t j_max, std::int64_t reps,
                                         std::uint64_t seed, const HTable& h,
                                         const analytics::GreenTable& green,
                                         double a_estimate, double a_stderr,
                                         int workers = 1);

// Mean of R(T*)/n over trees conditioned to n+1 vertices.
EstimateRecord conditioned_range(const OffspringDistribution& mu,
                                 const JumpDistribution& theta, std::int64_t n,
                                 std::int64_t reps, std::uint64_t seed,
                                 int workers = 1);

}  // namespace treerange::spine
