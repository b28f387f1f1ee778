#include <doctest.h>

#include <cmath>
#include <map>

#include "test_oracles.hpp"
#include "treerange/brw.hpp"
#include "treerange/errors.hpp"
#include "treerange/stats.hpp"
#include "treerange/trees.hpp"

using namespace treerange;
using distributions::JumpDistribution;
using distributions::OffspringDistribution;

namespace {

Point make_point(std::vector<int> v) {
  Point p = Point::zero(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p.c[i] = v[i];
  return p;
}

}  // namespace

TEST_CASE("population step") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(4);
  RngStream rng(1, 0, 0);

  // Extinction absorbs.
  brw::PointMeasure empty;
  auto still_empty = brw::brw_step(empty, mu, theta, rng);
  CHECK(still_empty.total == 0);

  // Deterministic fixture: a binary offspring draw that lands on two
  // children, with the unit jump in one dimension. Pick the first stream
  // whose single draw is two offspring, then both land at +1.
  auto binary = OffspringDistribution::from_table({{0, 0.5}, {2, 0.5}});
  auto unit = JumpDistribution::from_table(1, {{make_point({1}), 1.0}});
  std::uint64_t replica = 0;
  for (;; ++replica) {
    RngStream probe(2, replica, 0);
    if (binary.sample(probe) == 2) break;
  }
  RngStream fixed(2, replica, 0);
  auto one = brw::point_measure_at_origin(1, 1);
  auto next = brw::brw_step(one, binary, unit, fixed);
  CHECK(next.total == 2);
  REQUIRE(next.counts.size() == 1);
  CHECK(next.counts[0].first == make_point({1}));
  CHECK(next.counts[0].second == 2);

  // Criticality martingale: one-step totals have mean ratio one.
  const int reps = 30000;
  long double ratio_sum = 0.0L;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream r(3, rep, 0);
    auto state = brw::point_measure_at_origin(4, 10);
    auto stepped = brw::brw_step(state, mu, theta, r);
    ratio_sum += stepped.total / 10.0;
  }
  double mean = double(ratio_sum / reps);
  // Per-particle variance 2, so the ratio variance is 2/10.
  CHECK(std::fabs(mean - 1.0) <= 4.0 * std::sqrt(0.2 / reps));
}

TEST_CASE("run statistics") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);

  // Immediate extinction: P(N = 1) = mu(0) = 1/2.
  const int reps = 50000;
  int n1 = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(4, rep, 0);
    auto r = brw::brw_run(1, mu, theta, rng, 100000);
    CHECK(r.range <= r.progeny);
    CHECK(r.progeny >= 1);
    if (r.progeny == 1) ++n1;
  }
  CHECK(std::fabs(n1 / double(reps) - 0.5) <= 4.0 * std::sqrt(0.25 / reps));
}

TEST_CASE("progeny pmf against the killed-walk oracle") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  auto pmf1 = brw::progeny_pmf_exact(mu, 1, 9);
  // Hand values: P(N=1) = 1/2; P(N=2) = mu(1) mu(0) = 1/8.
  CHECK(pmf1[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pmf1[2] == doctest::Approx(0.125).epsilon(1e-12));
  auto pmf2 = brw::progeny_pmf_exact(mu, 2, 9);
  CHECK(pmf2[2] == doctest::Approx(0.25).epsilon(1e-12));  // both die at once

  // Empirical law vs the DP over a small grid for p in {1, 2, 3}.
  for (int p : {1, 2, 3}) {
    auto pmf = brw::progeny_pmf_exact(mu, p, p + 8);
    const int reps = 40000;
    std::vector<double> obs(p + 9, 0.0), exp(p + 9, 0.0);
    std::int64_t overflow = 0;
    for (int rep = 0; rep < reps; ++rep) {
      RngStream rng(5 + p, rep, 0);
      auto r = brw::brw_run(p, mu, theta, rng, 20000, /*track_range=*/false);
      if (r.progeny <= p + 8)
        obs[r.progeny] += 1;
      else
        ++overflow;
    }
    double covered = 0.0;
    std::vector<double> obs2, exp2;
    for (int k = p; k <= p + 8; ++k) {
      obs2.push_back(obs[k]);
      exp2.push_back(pmf[k] * reps);
      covered += pmf[k];
    }
    obs2.push_back(double(overflow));
    exp2.push_back((1.0 - covered) * reps);
    auto chi = stats::chi_square_gof(obs2, exp2);
    CHECK(chi.p_value >= 0.01);
  }
}

TEST_CASE("single ancestor matches the spatial tree law") {
  // (R, N) for one initial particle has the law of (range, size) of an
  // unconditioned spatial tree; compare joint counts on a small grid.
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  const int reps = 40000;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> grid;
  std::vector<double> a_counts, b_counts;
  std::map<std::pair<std::int64_t, std::int64_t>, double> ca, cb;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream r1(6, rep, 0), r2(7, rep, 0);
    trees::PlaneTree t;
    brw::BrwRunResult run;
    try {
      run = brw::brw_run(1, mu, theta, r1, 100000);
      t = trees::sample_gw(mu, r2, 100000);
    } catch (const CapExceeded&) {
      continue;
    }
    if (run.truncated) continue;
    auto st = trees::assign_locations(t, theta, r2);
    auto key_run = std::make_pair(std::min<std::int64_t>(run.progeny, 9),
                                  std::min<std::int64_t>(run.range, 9));
    auto key_tree = std::make_pair(
        std::min<std::int64_t>(static_cast<std::int64_t>(t.size()), 9),
        std::min<std::int64_t>(trees::range_of(st), 9));
    ca[key_run] += 1;
    cb[key_tree] += 1;
    grid[key_run];
    grid[key_tree];
  }
  for (const auto& [key, unused] : grid) {
    (void)unused;
    a_counts.push_back(ca[key]);
    b_counts.push_back(cb[key]);
  }
  auto chi = stats::chi_square_two_sample(a_counts, b_counts);
  CHECK(chi.p_value >= 0.01);
}

TEST_CASE("hitting-time limit cdf") {
  CHECK_THROWS_AS(brw::j_cdf(0.0), DomainError);
  CHECK(brw::j_cdf(1e9) == doctest::Approx(1.0).epsilon(1e-4));

  // Quadrature oracle for the density (2 pi s^3)^{-1/2} exp(-1/(2s)).
  auto density = [](double s) {
    return std::pow(2.0 * M_PI * s * s * s, -0.5) * std::exp(-0.5 / s);
  };
  double q1 = oracles::simpson(density, 1e-6, 1.0, 20000);
  CHECK(brw::j_cdf(1.0) == doctest::Approx(q1).epsilon(1e-6));
  CHECK(brw::j_cdf(1.0) == doctest::Approx(0.3173105).epsilon(1e-6));

  // Median by bisection on the quadrature oracle.
  double lo = 0.5, hi = 10.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (oracles::simpson(density, 1e-6, mid, 20000) < 0.5)
      lo = mid;
    else
      hi = mid;
  }
  CHECK(brw::j_cdf(lo) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(lo == doctest::Approx(2.1980).epsilon(1e-3));

  // Ratios stay in (0, 1].
  auto res = brw::ratio_experiment(3, OffspringDistribution::geometric_critical(),
                                   JumpDistribution::srw(5), 2000, 8, 100000);
  for (double r : res.r_over_n) {
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
  }
}
