#pragma once

// Exact lattice computations: k-step transition probabilities, Green
// functions with certified error, hitting-time identities for the simple
// walk, local-limit comparisons, and the positivity diagnostics built on the
// Green function.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "treerange/distributions.hpp"
#include "treerange/point.hpp"
#include "treerange/rng.hpp"
#include "treerange/stats.hpp"

namespace treerange::analytics {

using distributions::JumpDistribution;
using distributions::OffspringDistribution;
using stats::EstimateRecord;

// Values on a sup-norm box {|x|_inf <= radius}, with an optional power-law
// model outside: amplitude * |x|^exponent.
struct LatticeFunction {
  int dim = 0;
  std::int32_t radius = 0;
  std::vector<double> values;  // size (2*radius+1)^dim, row-major
  std::optional<double> outside_amplitude;
  double outside_exponent = 0.0;

  std::size_t index_of(const Point& x) const;
  bool inside(const Point& x) const { return x.linf() <= radius; }
  double at(const Point& x) const;
};

// Exact k-fold convolution of theta on the minimal enclosing box.
// Throws BoxBudgetExceeded when k * support_radius exceeds box_budget.
LatticeFunction step_pmf_power(const JumpDistribution& theta, std::int64_t k,
                               std::int64_t box_budget = 128);

// Box-truncated convolution: mass leaving the box is accumulated rather than
// redistributed. Returns per-step values at a probe point plus the killed
// mass, for conservation checks.
struct TruncatedConvolution {
  std::vector<double> probe_values;  // p_k(probe) for k = 0..kmax (truncated)
  double alive_mass = 1.0;
  double killed_mass = 0.0;
};
TruncatedConvolution truncated_convolution_probe(const JumpDistribution& theta,
                                                 std::int64_t kmax,
                                                 std::int32_t box_radius,
                                                 const Point& probe);

// Return probabilities p_m(0) for the simple random walk on Z^d, m = 0..kmax,
// computed by exact coordinate-splitting (no lattice box). Supported d: 1..8.
std::vector<double> srw_return_pmf(int dim, std::int64_t kmax);

// P(S_m = 0) for theta: closed form for the SRW, box convolution otherwise.
std::vector<double> return_pmf(const JumpDistribution& theta, std::int64_t kmax,
                               std::int64_t box_budget = 64);

struct GreenValue {
  double value = 0.0;
  double error_bound = 0.0;
  std::int64_t terms = 0;  // -1 when evaluated by the integral representation
};

// Green function G(x) = sum_k p_k(x) for a transient walk (d >= 3).
// Axis-symmetric walks use the exact continuous-time product representation
// (error = quadrature bound); general walks use the truncated series with a
// certified tail + escape bound. Throws NonTransient for d <= 2.
GreenValue green(const JumpDistribution& theta, const Point& x, double eps);

// Green values tabulated on a sup-norm box with the isotropic far-field
// model outside. Requires an axis-symmetric theta (fast path) for radius of
// any size; the table is shared and immutable after construction.
class GreenTable {
 public:
  GreenTable(const JumpDistribution& theta, std::int32_t radius, double eps = 1e-9);

  double at(const Point& x) const;
  std::int32_t radius() const { return radius_; }
  double asymptotic_amplitude() const { return amplitude_; }
  int dim() const { return dim_; }

 private:
  double slot_value(const Point& x) const;

  int dim_;
  std::int32_t radius_;
  double amplitude_;  // G(x) ~ amplitude * |x|^(2-d)
  std::vector<double> class_values_;  // indexed by canonical sorted-abs class
  std::vector<std::int64_t> strides_;
};

// Isotropic far-field amplitude: G(x) ~ amp * |x|^(2-d) for covariance
// s2 * Id.
double green_asymptotic_amplitude(int dim, double coordinate_variance);

// Exact hitting-time identity for the simple random walk on Z:
// first-passage probability from m to -1 at step k versus the reflection
// formula, both as exact dyadic rationals (big-integer cross check).
struct KempermanPair {
  double lhs = 0.0;  // P_m(T = k) by killed-path counting
  double rhs = 0.0;  // ((m+1)/k) P_0(zeta_k = m+1)
  bool exact_equal = false;
};
KempermanPair kemperman_check(std::int64_t m, std::int64_t k);

// Exact binomial P_0(zeta_k = m) vs the Gaussian local limit main term.
struct LltComparison {
  double exact = 0.0;
  double gaussian = 0.0;
  double relative_error = 0.0;
};
LltComparison llt_compare(std::int64_t k, std::int64_t m);

// P_0(zeta_k = m) for simple random walk, exact in double precision.
double simple_walk_pmf(std::int64_t k, std::int64_t m);

// Monte Carlo of sum_{k<=m} G(S_k) / log m along walk trajectories.
struct GreenSumResult {
  EstimateRecord record;          // mean of sum/log m
  double fraction_dev_01 = 0.0;   // fraction with |sum - c log m| > 0.1 log m
  double fraction_dev_02 = 0.0;
  double second_moment = 0.0;     // of sum / log m
};
GreenSumResult green_sum_along_walk(const JumpDistribution& theta,
                                    std::int64_t m, std::int64_t reps,
                                    std::uint64_t seed,
                                    const GreenTable& table, int workers = 1);

// Exact expectation of sum_{k<=m} G(S_k) for the SRW on Z^4 (series oracle).
double exact_green_sum_expectation_srw4(std::int64_t m);

// Positivity diagnostic: log of the partial products
// prod_j (1 - g_mu((1-G(S_j))+)) / G(S_j) along sampled trajectories.
struct SuffcondResult {
  EstimateRecord record;       // median drift of the log product over the window
  double median_drift = 0.0;   // log P(j_hi) - log P(j_lo), median over reps
  double mean_log_final = 0.0;
  std::vector<double> drifts;  // per replica
};
SuffcondResult suffcond_diagnostic(const OffspringDistribution& mu,
                                   const JumpDistribution& theta,
                                   std::int64_t j_lo, std::int64_t j_hi,
                                   std::int64_t reps, std::uint64_t seed,
                                   const GreenTable& table,
                                   std::optional<double> stable_alpha = {},
                                   int workers = 1);

// Radial integral of a squared-Bessel reciprocal along four-dimensional
// Brownian paths: accumulates int_r^t ds/|B_s|^2 on an exact Gaussian grid
// and checks E[|B_s|^-2] = 1/(2s).
struct BesselResult {
  EstimateRecord record;           // mean of the integral
  double expected = 0.0;           // 0.5 * log(t/r)
  std::vector<double> marginal_s;  // probe times
  std::vector<double> marginal_mean_2s_over_rho2;  // should be ~1
};
BesselResult bessel_log_integral(double r, double t, double dt,
                                 std::int64_t reps, std::uint64_t seed,
                                 int workers = 1);

}  // namespace treerange::analytics
