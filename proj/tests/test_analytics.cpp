#include <doctest.h>

#include <cmath>

#include "test_oracles.hpp"
#include "treerange/analytics.hpp"
#include "treerange/errors.hpp"
#include "treerange/stats.hpp"

using namespace treerange;
using distributions::JumpDistribution;

namespace {

Point make_point(std::vector<int> v) {
  Point p = Point::zero(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p.c[i] = v[i];
  return p;
}

}  // namespace

TEST_CASE("step pmf powers") {
  auto theta = JumpDistribution::srw(4);
  auto f0 = analytics::step_pmf_power(theta, 0);
  CHECK(f0.at(Point::zero(4)) == doctest::Approx(1.0));

  // Two-step return: sum theta(y)^2 = 8 (1/8)^2 = 1/8.
  auto f2 = analytics::step_pmf_power(theta, 2);
  CHECK(f2.at(Point::zero(4)) == doctest::Approx(0.125).epsilon(1e-14));

  // Mass conservation and symmetry for k <= 12.
  for (int k : {1, 5, 12}) {
    auto f = analytics::step_pmf_power(theta, k, 64);
    long double mass = 0.0L;
    for (double v : f.values) mass += v;
    CHECK(std::fabs(double(mass) - 1.0) <= 1e-12);
    Point x = make_point({1, 2, 0, -1});
    Point nx = Point::zero(4);
    nx -= x;
    if (f.inside(x)) CHECK(f.at(x) == doctest::Approx(f.at(nx)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(analytics::step_pmf_power(theta, 1000, 64),
                  BoxBudgetExceeded);
}

TEST_CASE("return probabilities by coordinate splitting") {
  // d = 1: binomial oracle.
  auto b1 = analytics::srw_return_pmf(1, 12);
  for (int k = 0; k <= 12; k += 2) {
    double binom = std::exp(std::lgamma(k + 1) - 2 * std::lgamma(k / 2 + 1) -
                            k * std::log(2.0));
    CHECK(b1[k] == doctest::Approx(binom).epsilon(1e-12));
  }
  // d = 4 small values: p_2(0) = 1/8, p_4(0) = 21/512 by direct counting.
  auto b4 = analytics::srw_return_pmf(4, 12);
  CHECK(b4[2] == doctest::Approx(1.0 / 8.0).epsilon(1e-13));
  CHECK(b4[4] == doctest::Approx(21.0 / 512.0).epsilon(1e-13));

  // Independent route: exact box convolution agrees for k <= 10 in d = 4
  // and for a non-axis law in d = 2.
  auto theta4 = JumpDistribution::srw(4);
  auto conv = analytics::truncated_convolution_probe(theta4, 10, 11,
                                                     Point::zero(4));
  for (int k = 0; k <= 10; ++k)
    CHECK(b4[k] == doctest::Approx(conv.probe_values[k]).epsilon(1e-12));

  auto diag = JumpDistribution::from_table(
      2, {{make_point({1, 1}), 0.25}, {make_point({-1, -1}), 0.25},
          {make_point({1, 0}), 0.25}, {make_point({-1, 0}), 0.25}});
  auto pm = analytics::return_pmf(diag, 8, 16);
  auto conv2 =
      analytics::truncated_convolution_probe(diag, 8, 9, Point::zero(2));
  for (int k = 0; k <= 8; ++k)
    CHECK(pm[k] == doctest::Approx(conv2.probe_values[k]).epsilon(1e-12));
}

TEST_CASE("green values") {
  auto theta = JumpDistribution::srw(4);
  auto g0 = analytics::green(theta, Point::zero(4), 1e-9);
  CHECK(g0.value >= 1.0);  // G(x) >= p_0(x)

  // One-step decomposition G(0) = 1 + sum theta(y) G(y).
  double rhs = 1.0;
  for (std::size_t j = 0; j < theta.support().size(); ++j)
    rhs += theta.probabilities()[j] *
           analytics::green(theta, theta.support()[j], 1e-9).value;
  CHECK(g0.value == doctest::Approx(rhs).epsilon(1e-8));

  // Series route with certified bounds brackets the quadrature value (d=3,
  // where the full series box is affordable).
  auto theta3 = JumpDistribution::srw(3);
  auto quad = analytics::green(theta3, make_point({1, 0, 0}), 1e-10);
  auto conv = analytics::truncated_convolution_probe(theta3, 1500, 40,
                                                     make_point({1, 0, 0}));
  long double partial = 0.0L;
  for (double v : conv.probe_values) partial += v;
  CHECK(quad.value >= double(partial) - 1e-10);
  CHECK(quad.value <= double(partial) + conv.killed_mass * 0.3 + 0.05);

  // Non-axis laws go through the certified series path.
  auto diag = JumpDistribution::from_table(
      3, {{make_point({1, 1, 0}), 1.0 / 6}, {make_point({-1, -1, 0}), 1.0 / 6},
          {make_point({1, 0, 0}), 1.0 / 6}, {make_point({-1, 0, 0}), 1.0 / 6},
          {make_point({0, 0, 1}), 1.0 / 6}, {make_point({0, 0, -1}), 1.0 / 6}});
  auto gs = analytics::green(diag, make_point({1, 1, 1}), 0.15);
  CHECK(gs.value > 0.0);
  CHECK(gs.error_bound <= 0.15);
  CHECK(gs.terms > 0);

  CHECK_THROWS_AS(analytics::green(JumpDistribution::srw(2), Point::zero(2), 1e-3),
                  NonTransient);

  // Asymptotic trend: |x|^2 G approaches 2/pi^2 from the near field.
  double target = 2.0 / (M_PI * M_PI);
  double e10 = std::fabs(100.0 * analytics::green(theta, make_point({10, 0, 0, 0}), 1e-9).value - target);
  double e40 = std::fabs(1600.0 * analytics::green(theta, make_point({40, 0, 0, 0}), 1e-9).value - target);
  CHECK(e40 < e10);
  CHECK(e40 <= 0.10 * target);
}

TEST_CASE("green table far field") {
  auto theta = JumpDistribution::srw(4);
  analytics::GreenTable table(theta, 6);
  // Inside matches the direct evaluation; outside follows the power model.
  Point in = make_point({2, -1, 0, 3});
  CHECK(table.at(in) ==
        doctest::Approx(analytics::green(theta, in, 1e-9).value).epsilon(1e-6));
  Point out = make_point({30, 0, 0, 0});
  double direct = analytics::green(theta, out, 1e-10).value;
  CHECK(table.at(out) == doctest::Approx(direct).epsilon(0.02));
}

TEST_CASE("hitting-time identity small cases") {
  auto r1 = analytics::kemperman_check(0, 1);
  CHECK(r1.lhs == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.rhs == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.exact_equal);

  // Path enumeration oracle for m=0, k=3: the only path is +1,-1,-1.
  auto r3 = analytics::kemperman_check(0, 3);
  CHECK(r3.lhs == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
  CHECK(r3.exact_equal);

  CHECK_THROWS_AS(analytics::kemperman_check(1, 3), ParityError);
  CHECK_THROWS_AS(analytics::kemperman_check(3, 2), DomainError);
}

TEST_CASE("local limit comparison") {
  auto r = analytics::llt_compare(10000, 0);
  CHECK(r.relative_error < 1e-3);

  // Boundary case: reported, not asserted.
  auto edge = analytics::llt_compare(100, 100);
  CHECK(edge.exact > 0.0);

  // Error decreasing in k at fixed m / sqrt(k), exact binomial oracle.
  double prev = 1e9;
  for (std::int64_t k : {100, 400, 1600, 6400}) {
    std::int64_t m = static_cast<std::int64_t>(2 * std::sqrt(double(k)));
    if ((k + m) % 2) ++m;
    auto c = analytics::llt_compare(k, m);
    CHECK(c.relative_error < prev);
    prev = c.relative_error;
  }
}

TEST_CASE("green sum along walks") {
  auto theta = JumpDistribution::srw(4);
  analytics::GreenTable table(theta, 16);

  // MC mean against the exact series expectation at m = 10^4.
  const std::int64_t m = 10000;
  auto res = analytics::green_sum_along_walk(theta, m, 200, 5, table);
  double exact = analytics::exact_green_sum_expectation_srw4(m) / std::log(double(m));
  CHECK(std::fabs(res.record.value - exact) <= 4.0 * res.record.stderr_);

  // First term alone: the sum is at least G(0).
  CHECK(res.record.value * std::log(double(m)) >= 1.2394);

  // The exact scaled expectation drifts toward the limit as m grows.
  double target = 4.0 / (M_PI * M_PI);
  double e4 = std::fabs(analytics::exact_green_sum_expectation_srw4(10000) /
                            std::log(1e4) - target);
  double e6 = std::fabs(analytics::exact_green_sum_expectation_srw4(1000000) /
                            std::log(1e6) - target);
  double e8 = std::fabs(analytics::exact_green_sum_expectation_srw4(100000000) /
                            std::log(1e8) - target);
  CHECK(e6 < e4);
  CHECK(e8 < e6);

  // Second-moment growth proxy: E[(sum/log m)^2] stays bounded by a modest
  // multiple of the squared mean.
  CHECK(res.second_moment <= 8.0 * res.record.value * res.record.value);
}

TEST_CASE("second-moment kernel bound") {
  // Phi(x) = sum_y G(y) G(x-y)^2 obeys the |x|^-2 (1 + log |x|) envelope
  // with a stable constant across the probed radii.
  auto theta = JumpDistribution::srw(4);
  analytics::GreenTable table(theta, 26);
  auto phi_at = [&](const Point& x) {
    // Both singular windows (around 0 and around x) sit inside the summation
    // box for the probed radii; the remainder decays like |y|^-8.
    long double s = 0.0L;
    Point y = Point::zero(4);
    const int R = 22;
    for (y.c[0] = -R; y.c[0] <= R; ++y.c[0])
      for (y.c[1] = -R; y.c[1] <= R; ++y.c[1])
        for (y.c[2] = -R; y.c[2] <= R; ++y.c[2])
          for (y.c[3] = -R; y.c[3] <= R; ++y.c[3]) {
            double gy = table.at(y);
            double gxy = table.at(x - y);
            s += gy * gxy * gxy;
          }
    return double(s);
  };
  double c5 = phi_at(make_point({5, 0, 0, 0})) * 25.0 / (1 + std::log(5.0));
  double c10 = phi_at(make_point({10, 0, 0, 0})) * 100.0 / (1 + std::log(10.0));
  CHECK(c5 > 0.0);
  CHECK(c10 > 0.0);
  CHECK(std::max(c5, c10) / std::min(c5, c10) <= 2.5);
}

TEST_CASE("brownian radial integral") {
  auto res = analytics::bessel_log_integral(1.0, std::exp(2.0), 1e-3, 3000, 9);
  // Exact marginal: E[2s / rho_s^2] = 1.
  for (double mval : res.marginal_mean_2s_over_rho2)
    CHECK(std::fabs(mval - 1.0) <= 0.08);
  // Mean integral over [1, e^2] is 1 within 5%.
  CHECK(std::fabs(res.record.value - 1.0) <= 0.05);

  // Scaling: the law over [r, lambda r] does not depend on r.
  auto res2 = analytics::bessel_log_integral(4.0, 4.0 * std::exp(2.0), 4e-3,
                                             3000, 10);
  CHECK(std::fabs(res2.record.value - res.record.value) <=
        3.0 * std::sqrt(res.record.stderr_ * res.record.stderr_ +
                        res2.record.stderr_ * res2.record.stderr_));

  CHECK_THROWS_AS(analytics::bessel_log_integral(0.5, 2.0, 1e-4, 10, 1),
                  DomainError);
}
