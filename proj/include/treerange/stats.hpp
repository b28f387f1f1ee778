#pragma once

// Estimate aggregation and the small set of test statistics the experiment
// suites rely on (chi-square, Kolmogorov-Smirnov, quantiles).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace treerange::stats {

// Aggregated Monte Carlo estimate with the run parameters echoed back.
struct EstimateRecord {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string params;      // compact JSON echo
  std::string extra;       // experiment-specific diagnostics, JSON
  double elapsed_ms = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  double sample_sd = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  if (xs.empty()) return r;
  long double s = 0.0L;
  for (double x : xs) s += x;
  r.mean = static_cast<double>(s / xs.size());
  if (xs.size() > 1) {
    long double v = 0.0L;
    for (double x : xs) v += (x - r.mean) * (x - r.mean);
    r.sample_sd = std::sqrt(static_cast<double>(v / (xs.size() - 1)));
    r.stderr_ = r.sample_sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return r;
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  double pos = q * (xs.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= xs.size()) return xs.back();
  double frac = pos - lo;
  return xs[lo] * (1 - frac) + xs[lo + 1] * frac;
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

// Pearson chi-square statistic for observed counts vs expected counts.
// Bins with expected < min_expected are pooled into the last kept bin.
struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                               const std::vector<double>& expected,
                               double min_expected = 5.0);

// Two-sample chi-square over matched count vectors.
ChiSquareResult chi_square_two_sample(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      double min_expected = 5.0);

double chi_square_p_value(double statistic, int dof);

// One-sample KS statistic against cdf values evaluated at the sorted sample.
// `cdf_at` must be nondecreasing with values in [0,1].
double ks_statistic(std::vector<double> sample,
                    const std::vector<double>& cdf_at_sorted_sample);

// Two-sample KS statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic KS critical value at significance alpha for effective size n.
double ks_critical(double alpha, double n_effective);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace treerange::stats
