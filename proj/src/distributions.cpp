#include "treerange/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

namespace treerange::distributions {

namespace {

using Rational = boost::multiprecision::cpp_rational;

Rational to_rational(double x) {
  // Doubles are dyadic rationals; this conversion is exact.
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(x, &exp);
  std::int64_t mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  exp -= 53;
  Rational r(mant);
  if (exp >= 0) {
    r *= Rational(boost::multiprecision::cpp_int(1) << exp);
  } else {
    r /= Rational(boost::multiprecision::cpp_int(1) << (-exp));
  }
  return r;
}

}  // namespace

OffspringDistribution OffspringDistribution::geometric_critical() {
  OffspringDistribution d;
  d.geometric_ = true;
  d.mean_ = 1.0;
  d.variance_ = 2.0;
  d.support_gcd_ = 1;
  d.name_ = "geometric";
  return d;
}

OffspringDistribution OffspringDistribution::from_table(
    const std::vector<std::pair<std::int64_t, double>>& entries,
    std::string name) {
  std::int64_t max_k = 0;
  for (const auto& [k, p] : entries) {
    if (k < 0) throw DomainError("offspring count must be >= 0");
    if (p < 0) throw DomainError("probabilities must be >= 0");
    max_k = std::max(max_k, k);
  }
  std::vector<double> pmf(max_k + 1, 0.0);
  for (const auto& [k, p] : entries) pmf[k] += p;

  long double total = 0.0L;
  for (double p : pmf) total += p;
  if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12)
    throw NotNormalized("offspring pmf sums to " +
                        std::to_string(static_cast<double>(total)));
  for (double& p : pmf) p = static_cast<double>(p / total);

  long double mean = 0.0L, m2 = 0.0L;
  for (std::int64_t k = 0; k <= max_k; ++k) {
    mean += pmf[k] * static_cast<long double>(k);
    m2 += pmf[k] * static_cast<long double>(k) * k;
  }
  if (std::fabs(static_cast<double>(mean) - 1.0) > 1e-10)
    throw NotCritical("offspring mean is " +
                      std::to_string(static_cast<double>(mean)));
  if (max_k >= 1 && pmf[1] == 1.0)
    throw Degenerate("pmf(1) = 1");

  OffspringDistribution d;
  d.pmf_ = pmf;
  d.max_k_ = max_k;
  d.mean_ = static_cast<double>(mean);
  d.variance_ = static_cast<double>(m2 - mean * mean);
  d.name_ = std::move(name);

  d.tail_.assign(max_k + 1, 0.0);
  long double acc = 0.0L;
  for (std::int64_t k = max_k; k >= 0; --k) {
    // tail_[k] = mu([k+1, inf)); accumulate from the top for accuracy.
    d.tail_[k] = static_cast<double>(acc);
    acc += pmf[k];
  }

  std::int64_t g = 0;
  for (std::int64_t k = 0; k <= max_k; ++k)
    if (pmf[k] > 0.0) g = std::gcd(g, k);
  d.support_gcd_ = g == 0 ? 1 : g;

  d.pmf_alias_.build(pmf);
  // Tail distribution sums to 1 for critical mu; its support is [0, max_k-1].
  std::vector<double> tail_w(d.tail_.begin(), d.tail_.end());
  if (!tail_w.empty()) tail_w.pop_back();
  if (tail_w.empty()) tail_w.push_back(1.0);
  d.tail_alias_.build(tail_w);
  return d;
}

double OffspringDistribution::pmf(std::int64_t k) const {
  if (k < 0) return 0.0;
  if (geometric_) return std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(k, 1070)) - 1);
  return k <= max_k_ ? pmf_[k] : 0.0;
}

double OffspringDistribution::tail(std::int64_t k) const {
  if (k < 0) return 1.0;
  if (geometric_) return std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(k, 1070)) - 1);
  return k < max_k_ ? tail_[k] : 0.0;
}

double OffspringDistribution::gen_fn(double r) const {
  if (r < 0.0 || r > 1.0) throw DomainError("gen_fn requires r in [0,1]");
  if (geometric_) return 1.0 / (2.0 - r);
  long double s = 0.0L, rp = 1.0L;
  for (std::int64_t k = 0; k <= max_k_; ++k) {
    s += pmf_[k] * rp;
    rp *= r;
  }
  return static_cast<double>(s);
}

double OffspringDistribution::tail_power_series(double r) const {
  if (r < 0.0 || r > 1.0) throw DomainError("tail series requires r in [0,1]");
  if (geometric_) return 1.0 / (2.0 - r);
  long double s = 0.0L, rp = 1.0L;
  for (std::int64_t k = 0; k < max_k_; ++k) {
    s += tail_[k] * rp;
    rp *= r;
  }
  return static_cast<double>(s);
}

std::int64_t OffspringDistribution::sample(RngStream& rng) const {
  if (geometric_) {
    // Count of low one-bits of a uniform word has pmf 2^-(k+1).
    std::int64_t k = 0;
    for (;;) {
      std::uint64_t u = rng.next_u64();
      if (u != ~0ull) {
        int t = __builtin_ctzll(~u);
        return k + t;
      }
      k += 64;
    }
  }
  return pmf_alias_.sample(rng);
}

std::int64_t OffspringDistribution::sample_tail(RngStream& rng) const {
  if (geometric_) {
    // Tail of geometric(1/2) equals its pmf.
    return sample(rng);
  }
  return tail_alias_.sample(rng);
}

namespace {

// Column-style Hermite normal form over int64; entries stay tiny for the
// small support matrices seen here.
AdaptednessCertificate hnf_certificate(int dim,
                                       std::vector<std::vector<std::int64_t>> m) {
  const int cols = static_cast<int>(m.empty() ? 0 : m[0].size());
  AdaptednessCertificate cert;
  int pc = 0;  // pivot column
  for (int row = 0; row < dim && pc < cols; ++row) {
    // Euclidean elimination across columns pc..cols-1 on this row.
    for (;;) {
      int best = -1;
      std::int64_t best_abs = 0;
      for (int c = pc; c < cols; ++c) {
        std::int64_t a = std::llabs(m[row][c]);
        if (a != 0 && (best < 0 || a < best_abs)) { best = c; best_abs = a; }
      }
      if (best < 0) break;
      for (int r = 0; r < dim; ++r) std::swap(m[r][pc], m[r][best]);
      bool done = true;
      for (int c = pc + 1; c < cols; ++c) {
        if (m[row][c] == 0) continue;
        std::int64_t q = m[row][c] / m[row][pc];
        for (int r = 0; r < dim; ++r) m[r][c] -= q * m[r][pc];
        if (m[row][c] != 0) done = false;
      }
      if (done) break;
    }
    if (pc < cols && m[row][pc] != 0) ++pc;
  }
  cert.normal_form = m;
  cert.diagonal.assign(dim, 0);
  // After elimination the first `pc` columns are lower-triangular with the
  // pivots on successive rows; recover them.
  int col = 0;
  for (int row = 0; row < dim; ++row) {
    if (col < cols && m[row][col] != 0) {
      cert.diagonal[row] = m[row][col];
      ++col;
    }
  }
  cert.adapted = true;
  for (int row = 0; row < dim; ++row)
    if (std::llabs(cert.diagonal[row]) != 1) cert.adapted = false;
  return cert;
}

}  // namespace

AdaptednessCertificate adaptedness_certificate(
    int dim, const std::vector<Point>& vectors) {
  std::vector<std::vector<std::int64_t>> m(dim);
  auto push = [&](const Point& p) {
    for (int r = 0; r < dim; ++r) m[r].push_back(p.c[r]);
  };
  for (const Point& v : vectors) push(v);
  // Augment with differences from the first vector; they lie in the same
  // lattice and speed up the reduction for shifted supports.
  for (std::size_t i = 1; i < vectors.size(); ++i)
    push(vectors[i] - vectors[0]);
  return hnf_certificate(dim, std::move(m));
}

AdaptednessCertificate adaptedness_check(int dim,
                                         const std::vector<Point>& vectors) {
  if (vectors.empty()) throw DomainError("empty support");
  AdaptednessCertificate cert = adaptedness_certificate(dim, vectors);
  if (!cert.adapted)
    throw NotAdapted("support generates a proper subgroup of Z^d");
  return cert;
}

JumpDistribution JumpDistribution::srw(int dim) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  std::vector<std::pair<Point, double>> sup;
  for (int i = 0; i < dim; ++i) {
    for (int s : {+1, -1}) {
      Point p = Point::zero(dim);
      p.c[i] = s;
      sup.emplace_back(p, 1.0 / (2.0 * dim));
    }
  }
  return from_table(dim, sup, "srw");
}

JumpDistribution JumpDistribution::from_table(
    int dim, const std::vector<std::pair<Point, double>>& support,
    std::string name) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("dimension out of range");
  JumpDistribution d;
  d.dim_ = dim;
  for (const auto& [x, p] : support) {
    if (x.dim != dim) throw DomainError("support vector dimension mismatch");
    if (p < 0) throw DomainError("probabilities must be >= 0");
    if (p == 0) continue;
    d.support_.push_back(x);
    d.prob_.push_back(p);
  }
  if (d.support_.empty()) throw DomainError("empty support");
  d.finalize(name);
  return d;
}

void JumpDistribution::finalize(const std::string& name) {
  name_ = name;
  const std::size_t n = support_.size();
  {
    auto sorted = support_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DomainError("duplicate support vectors");
  }
  long double total = 0.0L;
  for (double p : prob_) total += p;
  if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12)
    throw NotNormalized("jump probabilities sum to " +
                        std::to_string(static_cast<double>(total)));

  // Exact mean via rational arithmetic on the stored doubles.
  centered_ = true;
  for (int i = 0; i < dim_; ++i) {
    Rational mi(0);
    for (std::size_t j = 0; j < n; ++j)
      mi += to_rational(prob_[j]) * support_[j].c[i];
    if (mi != 0) centered_ = false;
  }

  symmetric_ = true;
  for (std::size_t j = 0; j < n; ++j) {
    Point neg = Point::zero(dim_);
    neg -= support_[j];
    bool found = false;
    for (std::size_t l = 0; l < n; ++l)
      if (support_[l] == neg && prob_[l] == prob_[j]) { found = true; break; }
    if (!found) { symmetric_ = false; break; }
  }

  cov_.assign(dim_ * dim_, 0.0);
  std::vector<long double> mean(dim_, 0.0L);
  for (std::size_t j = 0; j < n; ++j)
    for (int i = 0; i < dim_; ++i) mean[i] += prob_[j] * support_[j].c[i];
  for (int a = 0; a < dim_; ++a) {
    for (int b = 0; b < dim_; ++b) {
      long double s = 0.0L;
      for (std::size_t j = 0; j < n; ++j)
        s += prob_[j] * (support_[j].c[a] - mean[a]) * (support_[j].c[b] - mean[b]);
      cov_[a * dim_ + b] = static_cast<double>(s);
    }
  }
  // det via Gaussian elimination with partial pivoting (d is tiny).
  {
    std::vector<double> m = cov_;
    double det = 1.0;
    for (int c = 0; c < dim_; ++c) {
      int piv = c;
      for (int r = c + 1; r < dim_; ++r)
        if (std::fabs(m[r * dim_ + c]) > std::fabs(m[piv * dim_ + c])) piv = r;
      if (m[piv * dim_ + c] == 0.0) { det = 0.0; break; }
      if (piv != c) {
        for (int k = 0; k < dim_; ++k) std::swap(m[piv * dim_ + k], m[c * dim_ + k]);
        det = -det;
      }
      det *= m[c * dim_ + c];
      for (int r = c + 1; r < dim_; ++r) {
        double f = m[r * dim_ + c] / m[c * dim_ + c];
        for (int k = c; k < dim_; ++k) m[r * dim_ + k] -= f * m[c * dim_ + k];
      }
    }
    sigma2_ = det > 0 ? std::pow(det, 0.25) : 0.0;
  }

  cert_ = adaptedness_check(dim_, support_);

  // Period: adapted walks are bipartite iff every jump flips the coordinate
  // parity, i.e. all support vectors have odd coordinate sum.
  bool all_odd = true;
  for (const Point& x : support_) {
    std::int64_t s = 0;
    for (int i = 0; i < dim_; ++i) s += x.c[i];
    if (((s % 2) + 2) % 2 == 0) all_odd = false;
  }
  period_ = all_odd ? 2 : 1;

  support_radius_ = 0;
  for (const Point& x : support_)
    support_radius_ = std::max(support_radius_, x.linf());

  axis_symmetric_ = true;
  for (std::size_t j = 0; j < n; ++j) {
    int nz = 0;
    for (int i = 0; i < dim_; ++i)
      if (support_[j].c[i] != 0) ++nz;
    if (nz != 1 || support_[j].linf() != 1) { axis_symmetric_ = false; break; }
  }
  if (axis_symmetric_ && !symmetric_) axis_symmetric_ = false;

  alias_.build(prob_);
}

std::optional<double> JumpDistribution::isotropic_variance() const {
  double v = cov_[0];
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) {
      double want = a == b ? v : 0.0;
      if (std::fabs(cov_[a * dim_ + b] - want) > 1e-12) return std::nullopt;
    }
  return v;
}

double JumpDistribution::prob_of(const Point& x) const {
  for (std::size_t j = 0; j < support_.size(); ++j)
    if (support_[j] == x) return prob_[j];
  return 0.0;
}

}  // namespace treerange::distributions
