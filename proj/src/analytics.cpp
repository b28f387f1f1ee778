#include "treerange/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "treerange/parallel.hpp"

namespace treerange::analytics {

namespace {

using BigInt = boost::multiprecision::cpp_int;

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
         std::lgamma(double(n - k + 1));
}

struct GslInit {
  GslInit() { gsl_set_error_handler_off(); }
};
[[maybe_unused]] const GslInit gsl_init{};

}  // namespace

std::size_t LatticeFunction::index_of(const Point& x) const {
  std::size_t idx = 0;
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  for (int i = 0; i < dim; ++i)
    idx = idx * side + static_cast<std::size_t>(x.c[i] + radius);
  return idx;
}

double LatticeFunction::at(const Point& x) const {
  if (inside(x)) return values[index_of(x)];
  if (outside_amplitude) {
    double r2 = x.norm2();
    return *outside_amplitude * std::pow(r2, outside_exponent / 2.0);
  }
  return 0.0;
}

LatticeFunction step_pmf_power(const JumpDistribution& theta, std::int64_t k,
                               std::int64_t box_budget) {
  const std::int64_t radius = k * theta.support_radius();
  if (radius > box_budget)
    throw BoxBudgetExceeded("k-step support radius " + std::to_string(radius) +
                            " exceeds budget " + std::to_string(box_budget));
  LatticeFunction f;
  f.dim = theta.dim();
  f.radius = static_cast<std::int32_t>(std::max<std::int64_t>(radius, 0));
  const std::size_t side = 2 * static_cast<std::size_t>(f.radius) + 1;
  std::size_t cells = 1;
  for (int i = 0; i < f.dim; ++i) {
    if (cells > (std::size_t{1} << 34) / side)
      throw BoxBudgetExceeded("box has too many cells");
    cells *= side;
  }
  f.values.assign(cells, 0.0);
  f.values[f.index_of(Point::zero(f.dim))] = 1.0;
  if (k == 0) return f;

  std::vector<double> next(cells, 0.0);
  const auto& sup = theta.support();
  const auto& pr = theta.probabilities();
  // Precompute flat index offsets of the support vectors.
  std::vector<std::ptrdiff_t> offs(sup.size());
  for (std::size_t j = 0; j < sup.size(); ++j) {
    std::ptrdiff_t o = 0;
    for (int i = 0; i < f.dim; ++i) o = o * static_cast<std::ptrdiff_t>(side) + sup[j].c[i];
    offs[j] = o;
  }
  for (std::int64_t step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    // Iterate source cells inside the reachable sub-box only.
    const std::int32_t reach = static_cast<std::int32_t>(step * theta.support_radius());
    Point x = Point::zero(f.dim);
    for (int i = 0; i < f.dim; ++i) x.c[i] = -std::min(f.radius, reach);
    for (;;) {
      double v = f.values[f.index_of(x)];
      if (v != 0.0) {
        std::size_t base = f.index_of(x);
        for (std::size_t j = 0; j < sup.size(); ++j)
          next[base + offs[j]] += v * pr[j];
      }
      int i = f.dim - 1;
      while (i >= 0) {
        if (x.c[i] < std::min(f.radius, reach)) {
          ++x.c[i];
          break;
        }
        x.c[i] = -std::min(f.radius, reach);
        --i;
      }
      if (i < 0) break;
    }
    f.values.swap(next);
  }
  return f;
}

TruncatedConvolution truncated_convolution_probe(const JumpDistribution& theta,
                                                 std::int64_t kmax,
                                                 std::int32_t box_radius,
                                                 const Point& probe) {
  // Extended-precision accumulators keep the mass drift far below 1e-12
  // over thousands of steps.
  LatticeFunction f;
  f.dim = theta.dim();
  f.radius = box_radius;
  const std::size_t side = 2 * static_cast<std::size_t>(box_radius) + 1;
  std::size_t cells = 1;
  for (int i = 0; i < f.dim; ++i) cells *= side;
  std::vector<long double> cur(cells, 0.0L), next(cells, 0.0L);
  cur[f.index_of(Point::zero(f.dim))] = 1.0L;

  TruncatedConvolution out;
  out.probe_values.push_back(probe.is_zero() ? 1.0 : 0.0);
  const bool probe_inside = f.inside(probe);
  const std::size_t probe_idx = probe_inside ? f.index_of(probe) : 0;

  long double killed = 0.0L;
  const auto& sup = theta.support();
  const auto& pr = theta.probabilities();
  std::vector<std::ptrdiff_t> offs(sup.size());
  std::vector<char> exits(sup.size());
  for (std::int64_t step = 0; step < kmax; ++step) {
    std::fill(next.begin(), next.end(), 0.0L);
    Point x = Point::zero(f.dim);
    for (int i = 0; i < f.dim; ++i) x.c[i] = -box_radius;
    for (;;) {
      long double v = cur[f.index_of(x)];
      if (v != 0.0L) {
        std::size_t base = f.index_of(x);
        for (std::size_t j = 0; j < sup.size(); ++j) {
          Point y = x + sup[j];
          if (y.linf() <= box_radius) {
            std::ptrdiff_t o = 0;
            for (int i = 0; i < f.dim; ++i)
              o = o * static_cast<std::ptrdiff_t>(side) + sup[j].c[i];
            next[base + o] += v * pr[j];
          } else {
            killed += v * pr[j];
          }
        }
      }
      int i = f.dim - 1;
      while (i >= 0) {
        if (x.c[i] < box_radius) { ++x.c[i]; break; }
        x.c[i] = -box_radius;
        --i;
      }
      if (i < 0) break;
    }
    cur.swap(next);
    out.probe_values.push_back(
        probe_inside ? static_cast<double>(cur[probe_idx]) : 0.0);
  }
  long double alive = 0.0L;
  for (long double v : cur) alive += v;
  out.alive_mass = static_cast<double>(alive);
  out.killed_mass = static_cast<double>(killed);
  return out;
}

namespace {

// One-dimensional simple-walk return probabilities b_k = P(zeta_k = 0),
// via the exact recurrence b_{k+2} = b_k (k+1)/(k+2).
std::vector<double> one_dim_return(std::int64_t kmax) {
  std::vector<double> b(kmax + 1, 0.0);
  b[0] = 1.0;
  for (std::int64_t k = 0; k + 2 <= kmax; k += 2)
    b[k + 2] = b[k] * double(k + 1) / double(k + 2);
  return b;
}

// Return pmf of the walk that picks sub-walk A with probability p_a per step:
// c_m = sum_j C(m,j) p_a^j (1-p_a)^(m-j) A_j B_{m-j}.
std::vector<double> combine_axes(const std::vector<double>& a,
                                 const std::vector<double>& b, double p_a) {
  const std::int64_t kmax = static_cast<std::int64_t>(a.size()) - 1;
  std::vector<double> c(kmax + 1, 0.0);
  const double lp = std::log(p_a), lq = std::log1p(-p_a);
  c[0] = 1.0;
  for (std::int64_t m = 2; m <= kmax; m += 2) {
    long double s = 0.0L;
    for (std::int64_t j = 0; j <= m; j += 2) {
      if (a[j] == 0.0 || b[m - j] == 0.0) continue;
      s += std::exp(log_choose(m, j) + j * lp + (m - j) * lq) * a[j] * b[m - j];
    }
    c[m] = static_cast<double>(s);
  }
  return c;
}

}  // namespace

std::vector<double> srw_return_pmf(int dim, std::int64_t kmax) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("dimension out of range");
  std::vector<double> b1 = one_dim_return(kmax);
  if (dim == 1) return b1;
  std::vector<double> b2(kmax + 1, 0.0);
  for (std::int64_t k = 0; k <= kmax; ++k) b2[k] = b1[k] * b1[k];
  if (dim == 2) return b2;
  if (dim == 3) return combine_axes(b1, b2, 1.0 / 3.0);
  std::vector<double> b4 = combine_axes(b2, b2, 0.5);
  if (dim == 4) return b4;
  if (dim == 5) return combine_axes(b1, b4, 1.0 / 5.0);
  if (dim == 6) return combine_axes(b2, b4, 2.0 / 6.0);
  if (dim == 7) return combine_axes(combine_axes(b1, b2, 1.0 / 3.0), b4, 3.0 / 7.0);
  return combine_axes(b4, b4, 0.5);
}

namespace {

bool is_srw(const JumpDistribution& theta) {
  if (!theta.axis_symmetric()) return false;
  const double want = 1.0 / (2.0 * theta.dim());
  for (double p : theta.probabilities())
    if (std::fabs(p - want) > 1e-15) return false;
  return true;
}

}  // namespace

std::vector<double> return_pmf(const JumpDistribution& theta, std::int64_t kmax,
                               std::int64_t box_budget) {
  if (is_srw(theta)) return srw_return_pmf(theta.dim(), kmax);
  if (kmax * theta.support_radius() > box_budget)
    throw BoxBudgetExceeded("return pmf for general theta needs a full box");
  TruncatedConvolution conv = truncated_convolution_probe(
      theta, kmax, static_cast<std::int32_t>(kmax * theta.support_radius()),
      Point::zero(theta.dim()));
  return conv.probe_values;
}

double green_asymptotic_amplitude(int dim, double coordinate_variance) {
  // G(x) ~ Gamma(d/2 - 1) / (2 pi^(d/2) s^2) |x|^(2-d) for covariance s^2 Id.
  return std::tgamma(dim / 2.0 - 1.0) /
         (2.0 * std::pow(M_PI, dim / 2.0) * coordinate_variance);
}

namespace {

struct AxisIntegrand {
  int dim;
  std::array<int, kMaxDim> order;
  std::array<double, kMaxDim> rate;
};

double axis_integrand(double t, void* params) {
  const AxisIntegrand* p = static_cast<const AxisIntegrand*>(params);
  double v = 1.0;
  for (int i = 0; i < p->dim; ++i)
    v *= gsl_sf_bessel_In_scaled(p->order[i], p->rate[i] * t);
  return v;
}

// Exact continuous-time representation for axis walks: unit-rate jump chain
// with independent coordinates, G(x) = int_0^inf prod_i e^{-q_i t} I_{x_i}(q_i t) dt.
GreenValue green_axis(const JumpDistribution& theta, const Point& x, double eps) {
  AxisIntegrand p;
  p.dim = theta.dim();
  for (int i = 0; i < p.dim; ++i) {
    Point e = Point::zero(p.dim);
    e.c[i] = 1;
    p.rate[i] = 2.0 * theta.prob_of(e);
    p.order[i] = std::abs(x.c[i]);
  }
  gsl_function f;
  f.function = &axis_integrand;
  f.params = &p;
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
  double result = 0.0, abserr = 0.0;
  int status = gsl_integration_qagiu(&f, 0.0, eps * 0.5, 1e-10, 4096, ws,
                                     &result, &abserr);
  gsl_integration_workspace_free(ws);
  if (status != 0 && status != GSL_EROUND)
    throw DomainError("Green quadrature failed with GSL status " +
                      std::to_string(status));
  GreenValue g;
  g.value = result;
  g.error_bound = std::max(abserr, 1e-14 * result);
  g.terms = -1;
  return g;
}

GreenValue green_series(const JumpDistribution& theta, const Point& x, double eps) {
  const int d = theta.dim();
  // Box radius: escaped-mass contribution is bounded by the far-field Green
  // value at the exit distance. The direction-uniform bound uses the largest
  // coordinate variance, with a factor-2 safety on the amplitude.
  double lmax = theta.covariance()[0];
  for (int i = 1; i < d; ++i) lmax = std::max(lmax, theta.covariance()[i * d + i]);
  double det = std::pow(theta.sigma2(), 4.0);
  if (det <= 0.0) throw DomainError("degenerate covariance");
  const double amp = 2.0 * std::tgamma(d / 2.0 - 1.0) /
                     (2.0 * std::pow(M_PI, d / 2.0)) *
                     std::pow(lmax, (d - 2.0) / 2.0) / std::sqrt(det);
  const std::size_t cells_budget = std::size_t{1} << 23;
  auto cells_at = [&](std::int32_t radius) {
    std::size_t cells = 1;
    for (int i = 0; i < d; ++i) {
      if (cells > cells_budget) return cells_budget + 1;
      cells *= 2 * static_cast<std::size_t>(radius) + 1;
    }
    return cells;
  };
  std::int32_t radius = x.linf() + 8;
  while (amp * std::pow(double(radius - x.linf()), 2.0 - d) > eps * 0.5) {
    ++radius;
    if (cells_at(radius) > cells_budget)
      throw BoxBudgetExceeded(
          "series Green evaluation cannot reach eps within the box budget");
  }
  if (cells_at(radius) > cells_budget)
    throw BoxBudgetExceeded("series Green box too large");

  const std::int64_t kmax = 2048;
  TruncatedConvolution conv =
      truncated_convolution_probe(theta, kmax, radius, x);
  long double sum = 0.0L;
  double max_last = 0.0;
  for (std::int64_t k = 0; k <= kmax; ++k) sum += conv.probe_values[k];
  for (std::int64_t k = kmax - std::min<std::int64_t>(kmax, 3); k <= kmax; ++k)
    max_last = std::max(max_last, conv.probe_values[k]);
  // Tail of the alive mass: max_z p_k(z) = O(k^{-d/2}); extrapolate from the
  // last computed values with a factor-2 safety.
  double tail = 2.0 * max_last * std::pow(double(kmax), d / 2.0) *
                (std::pow(double(kmax), 1.0 - d / 2.0) / (d / 2.0 - 1.0));
  double escape_err = conv.killed_mass *
                      amp * std::pow(double(radius - x.linf()), 2.0 - d);
  GreenValue g;
  g.value = static_cast<double>(sum);
  g.error_bound = tail + escape_err;
  g.terms = kmax;
  if (g.error_bound > eps)
    throw BoxBudgetExceeded("certified error " + std::to_string(g.error_bound) +
                            " exceeds requested eps");
  return g;
}

}  // namespace

GreenValue green(const JumpDistribution& theta, const Point& x, double eps) {
  if (theta.dim() <= 2) throw NonTransient("Green function requires d >= 3");
  if (!theta.centered()) throw DomainError("Green evaluation requires centered theta");
  if (theta.axis_symmetric()) return green_axis(theta, x, eps);
  return green_series(theta, x, eps);
}

GreenTable::GreenTable(const JumpDistribution& theta, std::int32_t radius,
                       double eps)
    : dim_(theta.dim()), radius_(radius) {
  if (!theta.axis_symmetric())
    throw DomainError("GreenTable requires an axis-symmetric jump law");
  auto iso = theta.isotropic_variance();
  if (!iso) throw DomainError("GreenTable requires isotropic covariance");
  amplitude_ = green_asymptotic_amplitude(dim_, *iso);

  const std::size_t side = static_cast<std::size_t>(radius_) + 1;
  strides_.assign(dim_, 1);
  for (int i = dim_ - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * static_cast<std::int64_t>(side);
  class_values_.assign(strides_[0] * side, -1.0);

  // Evaluate once per sorted-abs class, then mirror across the quadrant.
  std::vector<std::int32_t> a(dim_, 0);
  for (;;) {
    Point x = Point::zero(dim_);
    for (int i = 0; i < dim_; ++i) x.c[i] = a[i];
    GreenValue g = green(theta, x, eps);
    std::int64_t idx = 0;
    for (int i = 0; i < dim_; ++i) idx += strides_[i] * a[i];
    class_values_[idx] = g.value;
    // Next nondecreasing tuple.
    int i = dim_ - 1;
    while (i >= 0 && a[i] == radius_) --i;
    if (i < 0) break;
    ++a[i];
    for (int j = i + 1; j < dim_; ++j) a[j] = a[i];
  }
}

double GreenTable::slot_value(const Point& x) const {
  std::array<std::int32_t, kMaxDim> abs;
  for (int i = 0; i < dim_; ++i) abs[i] = x.c[i] < 0 ? -x.c[i] : x.c[i];
  std::sort(abs.begin(), abs.begin() + dim_);
  std::int64_t idx = 0;
  for (int i = 0; i < dim_; ++i) idx += strides_[i] * abs[i];
  return class_values_[idx];
}

double GreenTable::at(const Point& x) const {
  if (x.linf() <= radius_) return slot_value(x);
  return amplitude_ * std::pow(x.norm2(), (2.0 - dim_) / 2.0);
}

KempermanPair kemperman_check(std::int64_t m, std::int64_t k) {
  if (m < 0 || k <= m) throw DomainError("need k > m >= 0");
  if ((k + m) % 2 == 0) throw ParityError("k + m must be odd");
  // Count +-1 walks from m that stay >= 0 before step k and sit at -1 at
  // step k. Levels are offset by +1 so level 0 is the absorbing site.
  std::vector<BigInt> cur(m + k + 2, 0), nxt;
  cur[m + 1] = 1;
  for (std::int64_t step = 0; step < k - 1; ++step) {
    nxt.assign(cur.size(), 0);
    for (std::size_t lv = 1; lv + 1 < cur.size(); ++lv) {
      if (cur[lv] == 0) continue;
      nxt[lv + 1] += cur[lv];
      if (lv >= 2) nxt[lv - 1] += cur[lv];  // level 1 may not step to 0 early
    }
    cur.swap(nxt);
  }
  BigInt paths = cur[1];  // final step 1 -> 0 (i.e. 0 -> -1 unshifted)

  // rhs = ((m+1)/k) C(k, (k+m+1)/2) 2^-k.
  BigInt binom = 1;
  std::int64_t top = (k + m + 1) / 2;
  for (std::int64_t i = 0; i < top; ++i) {
    binom *= (k - i);
    binom /= (i + 1);
  }
  KempermanPair r;
  r.exact_equal = (paths * k == binom * (m + 1));
  r.lhs = paths.convert_to<double>() * std::exp2(-double(k));
  r.rhs = double(m + 1) / double(k) * binom.convert_to<double>() *
          std::exp2(-double(k));
  return r;
}

double simple_walk_pmf(std::int64_t k, std::int64_t m) {
  if (std::llabs(m) > k || ((k + m) % 2 + 2) % 2 == 1) return 0.0;
  std::int64_t up = (k + m) / 2;
  return std::exp(log_choose(k, up) - k * std::log(2.0));
}

LltComparison llt_compare(std::int64_t k, std::int64_t m) {
  if (std::llabs(m) > k) throw DomainError("|m| must be <= k");
  if (((k + m) % 2 + 2) % 2 == 1) throw ParityError("k + m must be even");
  LltComparison r;
  r.exact = simple_walk_pmf(k, m);
  r.gaussian = std::sqrt(2.0 / (M_PI * double(k))) *
               std::exp(-double(m) * double(m) / (2.0 * double(k)));
  r.relative_error = std::fabs(r.gaussian - r.exact) / r.exact;
  return r;
}

GreenSumResult green_sum_along_walk(const JumpDistribution& theta,
                                    std::int64_t m, std::int64_t reps,
                                    std::uint64_t seed,
                                    const GreenTable& table, int workers) {
  const double log_m = std::log(double(m));
  const double sigma4 = theta.sigma2() * theta.sigma2();
  const double target = 1.0 / (4.0 * M_PI * M_PI * sigma4);
  std::vector<double> vals = replicate<double>(reps, workers, [&](std::uint64_t rep) {
    RngStream rng(seed, rep, /*domain=*/11);
    Point s = Point::zero(theta.dim());
    double acc = table.at(s);
    for (std::int64_t k = 1; k <= m; ++k) {
      s += theta.sample(rng);
      acc += table.at(s);
    }
    return acc / log_m;
  });
  std::int64_t dev01 = 0, dev02 = 0;
  long double m2 = 0.0L;
  for (double v : vals) {
    m2 += v * v;
    double dev = std::fabs(v - target) * log_m;
    if (dev > 0.1 * log_m) ++dev01;
    if (dev > 0.2 * log_m) ++dev02;
  }
  GreenSumResult out;
  auto ms = stats::mean_stderr(vals);
  out.record.value = ms.mean;
  out.record.stderr_ = ms.stderr_;
  out.record.reps = reps;
  out.record.seed = seed;
  out.fraction_dev_01 = double(dev01) / double(reps);
  out.fraction_dev_02 = double(dev02) / double(reps);
  out.second_moment = static_cast<double>(m2 / reps);
  return out;
}

double exact_green_sum_expectation_srw4(std::int64_t m) {
  // E[sum_{k<=m} G(S_k)] = sum_s min(s+1, m+1) p_s(0): exact return pmf up to
  // a crossover, the even-step local-limit form beyond it.
  static std::mutex mu;
  static std::vector<double> cached;
  const std::int64_t s0 = 10000;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (cached.empty()) cached = srw_return_pmf(4, s0);
  }
  long double e = 0.0L;
  for (std::int64_t s = 0; s <= std::min(m, s0); ++s)
    e += double(s + 1) * cached[s];
  for (std::int64_t s = m + 1; s <= s0; ++s)
    e += double(m + 1) * cached[s];
  const double a = 8.0 / (M_PI * M_PI);  // s^2 p_s(0) -> 8/pi^2 along even s
  for (std::int64_t s = s0 + 2; s <= m; s += 2)
    e += double(s + 1) * a / (double(s) * double(s));
  // Tail sum_{even s > max(m, s0)} (m+1) a / s^2.
  double start = double(std::max(m, s0)) / 2.0 + 1.0;
  double tail_sum = 1.0 / (start - 0.5);  // ~ sum_{j >= start} j^-2
  e += double(m + 1) * (a / 4.0) * tail_sum;
  return static_cast<double>(e);
}

SuffcondResult suffcond_diagnostic(const OffspringDistribution& mu,
                                   const JumpDistribution& theta,
                                   std::int64_t j_lo, std::int64_t j_hi,
                                   std::int64_t reps, std::uint64_t seed,
                                   const GreenTable& table,
                                   std::optional<double> stable_alpha,
                                   int workers) {
  SuffcondResult out;
  struct Pair {
    double drift, final_log;
  };
  std::vector<Pair> res = replicate<Pair>(reps, workers, [&](std::uint64_t rep) {
    RngStream rng(seed, rep, /*domain=*/12);
    Point s = Point::zero(theta.dim());
    double log_prod = 0.0, at_lo = 0.0;
    double stable_sum = 0.0;
    for (std::int64_t j = 1; j <= j_hi; ++j) {
      s += theta.sample(rng);
      double gs = table.at(s);
      // (1 - g((1-G)+))/G: for G <= 1 this equals the tail power series at
      // 1 - G exactly, which stays stable as G -> 0.
      double factor = gs < 1.0 ? mu.tail_power_series(1.0 - gs)
                               : (1.0 - mu.gen_fn(0.0)) / gs;
      log_prod += std::log(factor);
      if (stable_alpha) stable_sum += std::pow(gs, *stable_alpha - 1.0);
      if (j == j_lo) at_lo = log_prod;
    }
    (void)stable_sum;
    return Pair{log_prod - at_lo, log_prod};
  });
  out.drifts.resize(reps);
  std::vector<double> finals(reps);
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    out.drifts[rep] = res[rep].drift;
    finals[rep] = res[rep].final_log;
  }
  out.median_drift = stats::median(out.drifts);
  auto ms = stats::mean_stderr(finals);
  out.mean_log_final = ms.mean;
  out.record.value = out.median_drift;
  out.record.stderr_ = stats::mean_stderr(out.drifts).stderr_;
  out.record.reps = reps;
  out.record.seed = seed;
  return out;
}

BesselResult bessel_log_integral(double r, double t, double dt,
                                 std::int64_t reps, std::uint64_t seed,
                                 int workers) {
  if (!(1.0 <= r && r < t)) throw DomainError("need 1 <= r < t");
  if (dt > 1e-3 * r) throw DomainError("dt must be <= 1e-3 * r");
  BesselResult out;
  out.expected = 0.5 * std::log(t / r);
  out.marginal_s = {1.0, 4.0, 16.0};
  while (!out.marginal_s.empty() && out.marginal_s.back() > t)
    out.marginal_s.pop_back();
  const std::size_t nprobe = out.marginal_s.size();
  const double sdt = std::sqrt(dt);
  struct Res {
    double integral;
    std::array<double, 3> marg;
  };
  std::vector<Res> res = replicate<Res>(reps, workers, [&](std::uint64_t rep) {
    RngStream rng(seed, rep, /*domain=*/13);
    std::array<double, 4> b{0, 0, 0, 0};
    Res r_out{0.0, {0, 0, 0}};
    double s = 0.0;
    std::size_t probe = 0;
    std::int64_t nsteps = static_cast<std::int64_t>(std::ceil(t / dt));
    for (std::int64_t k = 0; k < nsteps; ++k) {
      for (double& c : b) c += sdt * rng.next_normal();
      s += dt;
      double rho2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2] + b[3] * b[3];
      if (s > r && s <= t) r_out.integral += dt / rho2;
      if (probe < nprobe && s >= out.marginal_s[probe]) {
        r_out.marg[probe] = 2.0 * out.marginal_s[probe] / rho2;
        ++probe;
      }
    }
    return r_out;
  });
  std::vector<long double> marg(nprobe, 0.0L);
  std::vector<double> vals(reps);
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    vals[rep] = res[rep].integral;
    for (std::size_t i = 0; i < nprobe; ++i) marg[i] += res[rep].marg[i];
  }
  auto ms = stats::mean_stderr(vals);
  out.record.value = ms.mean;
  out.record.stderr_ = ms.stderr_;
  out.record.reps = reps;
  out.record.seed = seed;
  for (std::size_t i = 0; i < marg.size(); ++i)
    out.marginal_mean_2s_over_rho2.push_back(static_cast<double>(marg[i] / reps));
  return out;
}

}  // namespace treerange::analytics
