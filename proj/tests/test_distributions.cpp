#include <doctest.h>

#include <cmath>

#include "treerange/distributions.hpp"
#include "treerange/errors.hpp"
#include "treerange/stats.hpp"

using namespace treerange;
using distributions::JumpDistribution;
using distributions::OffspringDistribution;

TEST_CASE("geometric offspring law") {
  auto mu = OffspringDistribution::geometric_critical();
  CHECK(mu.pmf(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mu.mean() == doctest::Approx(1.0).epsilon(1e-12));

  // Variance oracle: direct series sum_k k^2 2^{-k-1} - 1 to machine tolerance.
  long double m2 = 0.0L;
  for (int k = 0; k < 200; ++k) m2 += std::ldexp(1.0L, -k - 1) * k * k;
  CHECK(mu.variance() == doctest::Approx(double(m2 - 1.0L)).epsilon(1e-12));
  CHECK(mu.variance() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("offspring tables validate") {
  auto binary = OffspringDistribution::from_table({{0, 0.5}, {2, 0.5}});
  // Hand enumeration: E k^2 = 0.5 * 4 = 2, variance = 2 - 1 = 1.
  CHECK(binary.variance() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binary.support_gcd() == 2);

  CHECK_THROWS_AS(OffspringDistribution::from_table({{1, 1.0}}), Degenerate);
  CHECK_THROWS_AS(OffspringDistribution::from_table({{0, 0.3}, {1, 0.7}}),
                  NotCritical);
  CHECK_THROWS_AS(OffspringDistribution::from_table({{0, 0.4}, {2, 0.4}}),
                  NotNormalized);
}

TEST_CASE("offspring tails") {
  auto mu = OffspringDistribution::geometric_critical();
  CHECK(mu.tail(0) == doctest::Approx(0.5).epsilon(1e-15));
  // Partial-sum oracle for k = 3: 1 - (1/2 + 1/4 + 1/8 + 1/16) = 1/16.
  long double partial = 0.0L;
  for (int j = 0; j <= 3; ++j) partial += std::ldexp(1.0L, -j - 1);
  CHECK(mu.tail(3) == doctest::Approx(double(1.0L - partial)).epsilon(1e-14));
  CHECK(mu.tail(3) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));

  // Criticality makes the tails a probability law (geometric truncation slack).
  long double total = 0.0L;
  for (int k = 0; k < 64; ++k) total += mu.tail(k);
  CHECK(double(total) == doctest::Approx(1.0).epsilon(1e-12));

  auto binary = OffspringDistribution::from_table({{0, 0.5}, {2, 0.5}});
  CHECK(binary.tail(0) + binary.tail(1) + binary.tail(2) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("generating function and the tail-series identity") {
  auto mu = OffspringDistribution::geometric_critical();
  CHECK(mu.gen_fn(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // Closed form 1/(2-r) against the series oracle at r = 1/2.
  long double series = 0.0L, rp = 1.0L;
  for (int k = 0; k < 200; ++k) {
    series += std::ldexp(1.0L, -k - 1) * rp;
    rp *= 0.5L;
  }
  CHECK(mu.gen_fn(0.5) == doctest::Approx(double(series)).epsilon(1e-14));
  CHECK(mu.gen_fn(0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(mu.gen_fn(1.5), DomainError);
  CHECK_THROWS_AS(mu.gen_fn(-0.1), DomainError);

  // Identity at r = 0: both sides are 1 - mu(0).
  CHECK(mu.tail_power_series(0.0) ==
        doctest::Approx(1.0 - mu.pmf(0)).epsilon(1e-15));

  // sum tail(k) r^k = (1 - g(r)) / (1 - r) within the truncation bound.
  auto table = OffspringDistribution::from_table(
      {{0, 0.4}, {1, 0.35}, {2, 0.2}, {5, 0.05}});
  for (const auto& law : {mu, table}) {
    for (double r = 0.0; r < 0.95; r += 0.1) {
      const int K = 60;
      long double lhs = 0.0L, rp2 = 1.0L;
      for (int k = 0; k <= K; ++k) {
        lhs += law.tail(k) * rp2;
        rp2 *= r;
      }
      double rhs = (1.0 - law.gen_fn(r)) / (1.0 - r);
      double bound = std::pow(r, K + 1) / (1.0 - r) + 1e-12;
      CHECK(std::fabs(double(lhs) - rhs) <= bound);
      CHECK(law.tail_power_series(r) == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("simple random walk jump law") {
  auto theta = JumpDistribution::srw(4);
  CHECK(theta.dim() == 4);
  CHECK(theta.symmetric());
  CHECK(theta.centered());
  CHECK(theta.period() == 2);
  // Coordinate variance 2 * (1/8) = 1/4, covariance (1/4) Id.
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      CHECK(theta.covariance()[a * 4 + b] ==
            doctest::Approx(a == b ? 0.25 : 0.0).epsilon(1e-15));
  CHECK(theta.sigma2() == doctest::Approx(0.25).epsilon(1e-13));
  // 8 pi^2 sigma^4 = pi^2 / 2.
  double sigma4 = theta.sigma2() * theta.sigma2();
  CHECK(8.0 * M_PI * M_PI * sigma4 ==
        doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-12));

  auto d1 = JumpDistribution::srw(1);
  CHECK(d1.support().size() == 2);
  CHECK(d1.probabilities()[0] == doctest::Approx(0.5));
}

namespace {

Point make_point(std::vector<int> v) {
  Point p = Point::zero(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p.c[i] = v[i];
  return p;
}

}  // namespace

TEST_CASE("adaptedness certificates") {
  CHECK(JumpDistribution::srw(4).certificate().adapted);

  auto mk = [](int d, std::vector<std::vector<int>> vs) {
    std::vector<Point> pts;
    for (auto& v : vs) pts.push_back(make_point(v));
    (void)d;
    return pts;
  };
  // Even sublattice.
  auto even = distributions::adaptedness_certificate(
      2, mk(2, {{2, 0}, {0, 2}, {-2, 0}, {0, -2}}));
  CHECK_FALSE(even.adapted);
  // Checkerboard sublattice: the normal-form diagonal has product 2
  // (index two), matching the hand-computed divisors (1, 2).
  auto diag = distributions::adaptedness_certificate(
      2, mk(2, {{1, 1}, {1, -1}, {-1, -1}, {-1, 1}}));
  CHECK_FALSE(diag.adapted);
  CHECK(std::llabs(diag.diagonal[0] * diag.diagonal[1]) == 2);
  // Singleton support in one dimension generates the full lattice.
  auto single = distributions::adaptedness_certificate(1, mk(1, {{1}}));
  CHECK(single.adapted);

  CHECK_THROWS_AS(JumpDistribution::from_table(2, {{make_point({2, 0}), 0.5},
                                                   {make_point({-2, 0}), 0.5}}),
                  NotAdapted);
}

TEST_CASE("sampler determinism and moments") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(4);

  // Identical (seed, stream) pairs give identical sequences.
  RngStream a(42, 7, 3), b(42, 7, 3);
  for (int i = 0; i < 1000; ++i) CHECK(mu.sample(a) == mu.sample(b));
  RngStream a2(42, 7, 3), c(42, 8, 3);
  bool all_same = true;
  for (int i = 0; i < 64; ++i)
    if (mu.sample(a2) != mu.sample(c)) all_same = false;
  CHECK_FALSE(all_same);

  // CLT oracle: mean of 1e6 geometric samples within 4 stderr of 1.
  {
    RngStream rng(7, 0, 1);
    const int n = 1000000;
    long double sum = 0.0L;
    for (int i = 0; i < n; ++i) sum += mu.sample(rng);
    double mean = double(sum / n);
    CHECK(std::fabs(mean - 1.0) <= 4.0 * std::sqrt(2.0 / n));
  }

  // CLT oracle: empirical covariance of 1e6 jumps close to (1/4) Id.
  {
    RngStream rng(7, 1, 2);
    const int n = 1000000;
    std::vector<long double> cov(16, 0.0L);
    for (int i = 0; i < n; ++i) {
      Point x = theta.sample(rng);
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) cov[r * 4 + s] += double(x.c[r]) * x.c[s];
    }
    for (int r = 0; r < 4; ++r) {
      for (int s = 0; s < 4; ++s) {
        double v = double(cov[r * 4 + s] / n);
        double se = 4.0 * std::sqrt(0.25 / n);
        CHECK(std::fabs(v - (r == s ? 0.25 : 0.0)) <= se);
      }
    }
  }
}

TEST_CASE("jump table validation") {
  // Exact centering for an asymmetric dyadic table: 0.25*2 - 0.5*1 = 0.
  auto theta = JumpDistribution::from_table(
      1, {{make_point({2}), 0.25}, {make_point({-1}), 0.5},
          {make_point({0}), 0.25}});
  CHECK(theta.centered());
  CHECK_FALSE(theta.symmetric());
  CHECK(theta.period() == 1);

  auto d2 = JumpDistribution::from_table(
      2, {{make_point({1, 1}), 0.25}, {make_point({-1, -1}), 0.25},
          {make_point({1, 0}), 0.25}, {make_point({-1, 0}), 0.25}});
  CHECK(d2.covariance()[1] == doctest::Approx(d2.covariance()[2]));
  CHECK(d2.covariance()[0] >= 0.0);
  CHECK(d2.covariance()[3] >= 0.0);

  CHECK_THROWS_AS(JumpDistribution::from_table(1, {{make_point({1}), 0.5},
                                                   {make_point({1}), 0.5}}),
                  DomainError);  // duplicate support vectors
}
