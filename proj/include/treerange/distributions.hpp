#pragma once

// Input laws: critical offspring distribution mu on Z+ and lattice jump
// distribution theta on Z^d, with the scalar functionals every estimator
// consumes (generating function, tails, covariance, adaptedness).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treerange/errors.hpp"
#include "treerange/point.hpp"
#include "treerange/rng.hpp"

namespace treerange::distributions {

// Critical offspring law. Either the closed-form geometric(1/2) or a finite
// table (heavy-tailed inputs enter as truncated tables with the remainder
// mass lumped at the cap).
class OffspringDistribution {
 public:
  static OffspringDistribution geometric_critical();
  // Entries are (k, p) pairs; validates normalization, criticality and
  // non-degeneracy. Throws NotNormalized / NotCritical / Degenerate.
  static OffspringDistribution from_table(
      const std::vector<std::pair<std::int64_t, double>>& entries,
      std::string name = "table");

  double pmf(std::int64_t k) const;
  // mu([k+1, infinity)).
  double tail(std::int64_t k) const;
  // g_mu(r) = sum_k mu(k) r^k, r in [0,1]. Throws DomainError outside.
  double gen_fn(double r) const;
  // sum_k mu([k+1,inf)) r^k, equal to (1 - g_mu(r))/(1 - r) for r < 1 but
  // evaluated as a positive series (stable as r -> 1).
  double tail_power_series(double r) const;

  double mean() const { return mean_; }
  double variance() const { return variance_; }  // +inf never arises for tables
  const std::string& name() const { return name_; }
  bool is_geometric() const { return geometric_; }
  std::int64_t max_k() const { return geometric_ ? -1 : max_k_; }

  // Subgroup of Z generated by the support (gcd of support values and their
  // differences); tree sizes live in 1 + this group.
  std::int64_t support_gcd() const { return support_gcd_; }

  std::int64_t sample(RngStream& rng) const;
  // Sample from the tail distribution P(n) = mu([n+1, infinity)).
  std::int64_t sample_tail(RngStream& rng) const;

 private:
  OffspringDistribution() = default;

  bool geometric_ = false;
  std::vector<double> pmf_;   // dense on [0, max_k_] for tables
  std::vector<double> tail_;  // tail_[k] = mu([k+1, inf))
  std::int64_t max_k_ = 0;
  double mean_ = 1.0;
  double variance_ = 0.0;
  std::int64_t support_gcd_ = 1;
  std::string name_;
  AliasTable pmf_alias_;
  AliasTable tail_alias_;
};

struct AdaptednessCertificate {
  bool adapted = false;
  // Hermite normal form (column style) of the support matrix augmented with
  // pairwise differences; diagonal entries all +-1 iff adapted.
  std::vector<std::vector<std::int64_t>> normal_form;
  std::vector<std::int64_t> diagonal;
};

// Finite-support jump law on Z^d.
class JumpDistribution {
 public:
  // Simple random walk: support {+-e_i}, probability 1/(2d) each.
  static JumpDistribution srw(int dim);
  static JumpDistribution from_table(
      int dim, const std::vector<std::pair<Point, double>>& support,
      std::string name = "table");

  int dim() const { return dim_; }
  const std::vector<Point>& support() const { return support_; }
  const std::vector<double>& probabilities() const { return prob_; }
  bool symmetric() const { return symmetric_; }
  bool centered() const { return centered_; }
  int period() const { return period_; }
  // Covariance matrix, row-major d x d.
  const std::vector<double>& covariance() const { return cov_; }
  double sigma2() const { return sigma2_; }  // (det M_theta)^(1/4)
  // Per-coordinate variance when the covariance is isotropic diagonal,
  // otherwise nullopt.
  std::optional<double> isotropic_variance() const;
  const AdaptednessCertificate& certificate() const { return cert_; }
  std::int32_t support_radius() const { return support_radius_; }
  // True if the support is {+-e_i} with theta(e_i) = theta(-e_i).
  bool axis_symmetric() const { return axis_symmetric_; }

  Point sample(RngStream& rng) const { return support_[alias_.sample(rng)]; }

  double prob_of(const Point& x) const;

 private:
  JumpDistribution() = default;
  void finalize(const std::string& name);

  int dim_ = 0;
  std::vector<Point> support_;
  std::vector<double> prob_;
  std::vector<double> cov_;
  double sigma2_ = 0.0;
  bool symmetric_ = false;
  bool centered_ = false;
  bool axis_symmetric_ = false;
  int period_ = 1;
  std::int32_t support_radius_ = 0;
  AdaptednessCertificate cert_;
  std::string name_;
  AliasTable alias_;
};

// Lattice generated by the given vectors (augmented internally with pairwise
// differences), reported as a Hermite-normal-form certificate. Throws
// NotAdapted when the lattice is a proper subgroup of Z^d.
AdaptednessCertificate adaptedness_check(int dim,
                                         const std::vector<Point>& vectors);
// Non-throwing variant.
AdaptednessCertificate adaptedness_certificate(int dim,
                                               const std::vector<Point>& vectors);

}  // namespace treerange::distributions
