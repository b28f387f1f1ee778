#include "treerange/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace treerange::stats {

double chi_square_p_value(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                               const std::vector<double>& expected,
                               double min_expected) {
  // Pool small-expectation bins to keep the asymptotics valid.
  std::vector<double> obs, exp;
  double pool_o = 0, pool_e = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] >= min_expected) {
      obs.push_back(observed[i]);
      exp.push_back(expected[i]);
    } else {
      pool_o += observed[i];
      pool_e += expected[i];
    }
  }
  if (pool_e > 0) {
    obs.push_back(pool_o);
    exp.push_back(pool_e);
  }
  ChiSquareResult r;
  if (obs.size() < 2) return r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    double d = obs[i] - exp[i];
    r.statistic += d * d / exp[i];
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  r.p_value = chi_square_p_value(r.statistic, r.dof);
  return r;
}

ChiSquareResult chi_square_two_sample(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      double min_expected) {
  double na = 0, nb = 0;
  for (double x : a) na += x;
  for (double x : b) nb += x;
  ChiSquareResult r;
  if (na == 0 || nb == 0) return r;
  double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  std::vector<double> sa, sb;
  double pa = 0, pb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double tot = a[i] + b[i];
    if (tot * std::min(na, nb) / (na + nb) >= min_expected) {
      sa.push_back(a[i]);
      sb.push_back(b[i]);
    } else {
      pa += a[i];
      pb += b[i];
    }
  }
  if (pa + pb > 0) {
    sa.push_back(pa);
    sb.push_back(pb);
  }
  if (sa.size() < 2) return r;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    double tot = sa[i] + sb[i];
    if (tot == 0) continue;
    double d = ka * sa[i] - kb * sb[i];
    r.statistic += d * d / tot;
    ++r.dof;
  }
  r.dof -= 1;
  r.p_value = chi_square_p_value(r.statistic, r.dof);
  return r;
}

double ks_statistic(std::vector<double> sample,
                    const std::vector<double>& cdf_at_sorted_sample) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = cdf_at_sorted_sample[i];
    d = std::max(d, std::fabs((i + 1.0) / n - f));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

double ks_critical(double alpha, double n_effective) {
  // Asymptotic inverse of the Kolmogorov distribution tail.
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(n_effective);
}

double normal_cdf(double z) {
  boost::math::normal dist;
  return boost::math::cdf(dist, z);
}

double normal_quantile(double p) {
  boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

}  // namespace treerange::stats
