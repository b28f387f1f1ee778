#include <doctest.h>

#include <cmath>
#include <map>

#include "treerange/analytics.hpp"
#include "treerange/errors.hpp"
#include "treerange/spine.hpp"
#include "treerange/stats.hpp"

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

TEST_CASE("stream starts at the origin and has the tail child law") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(4);

  {
    RngStream rng(1, 0, 0);
    spine::SpineWalkStream stream(mu, theta, rng);
    CHECK(stream.next().is_zero());
  }

  // Child count of the first deep spine subtree follows the tail law, and
  // the root subtree is a plain GW tree (singleton with probability 1/2).
  const int reps = 100000;
  std::map<int, double> tail_counts;
  int singleton = 0;
  int used = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(2, rep, 0);
    try {
      auto p = spine::sample_spine_prefix(mu, theta, rng, 2, 0, 1000000);
      tail_counts[std::min<int>(p.trees[1].preorder_children[0], 6)] += 1;
      if (p.trees[0].size() == 1) ++singleton;
      ++used;
    } catch (const CapExceeded&) {
    }
  }
  std::vector<double> obs, exp;
  for (int k = 0; k <= 6; ++k) {
    obs.push_back(tail_counts[k]);
    double pk = k < 6 ? mu.tail(k) : std::ldexp(1.0, -6);  // pooled tail
    exp.push_back(pk * used);
  }
  auto chi = stats::chi_square_gof(obs, exp);
  CHECK(chi.p_value >= 0.01);
  CHECK(std::fabs(singleton / double(used) - 0.5) <=
        4.0 * std::sqrt(0.25 / used));
}

TEST_CASE("shift on the smallest prefix") {
  // Root subtree = root plus one leaf child: the shift re-roots at the leaf.
  spine::SpinePrefix p;
  p.dim = 4;
  p.trees.push_back(trees::PlaneTree{{1, 0}});
  p.locations.push_back({Point::zero(4), make_point({1, 0, 0, 0})});
  p.trees.push_back(trees::PlaneTree{{0}});
  p.locations.push_back({make_point({0, -1, 0, 0})});

  auto q = spine::shift_tau(p);
  REQUIRE(q.trees.size() == 3);
  CHECK(q.trees[0].preorder_children == std::vector<std::int32_t>{0});
  CHECK(q.locations[0][0].is_zero());
  // Old root becomes the first spine vertex, with the re-rooted child gone.
  CHECK(q.trees[1].preorder_children == std::vector<std::int32_t>{0});
  CHECK(q.locations[1][0] == make_point({-1, 0, 0, 0}));
  // Deeper subtrees shift unchanged, relocated.
  CHECK(q.trees[2].preorder_children == std::vector<std::int32_t>{0});
  CHECK(q.locations[2][0] == make_point({-1, -1, 0, 0}));

  // No re-rootable vertex anywhere: the shift reports an insufficient prefix.
  spine::SpinePrefix trivial;
  trivial.dim = 4;
  trivial.trees.push_back(trees::PlaneTree{{0}});
  trivial.locations.push_back({Point::zero(4)});
  CHECK_THROWS_AS(spine::shift_tau(trivial), InsufficientPrefix);
}

TEST_CASE("shift consumes one vertex and preserves the location sequence") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(4);
  RngStream rng(3, 0, 0);
  for (int i = 0; i < 200; ++i) {
    spine::SpinePrefix p;
    try {
      p = spine::sample_spine_prefix(mu, theta, rng, 2, 12, 1000000);
    } catch (const CapExceeded&) {
      continue;
    }
    auto locs = spine::enumerate_locations(p, 11);
    auto q = spine::shift_tau(p);
    CHECK(q.non_spine_vertices() == p.non_spine_vertices() - 1);
    auto locs2 = spine::enumerate_locations(q, 10);
    // New enumeration = old one shifted by one vertex, translated to 0.
    for (std::size_t j = 0; j < locs2.size(); ++j)
      CHECK(locs2[j] == locs[j + 1] - locs[1]);
  }
}

TEST_CASE("range process basics") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  auto trace = spine::range_process(mu, theta, 1000, {1, 10, 1000}, 4, 0);
  REQUIRE(trace.r_values.size() == 3);
  CHECK(trace.r_values[0] == 1);  // R_1 = 1
  CHECK(trace.r_values[1] >= trace.r_values[0]);
  CHECK(trace.r_values[2] >= trace.r_values[1]);
  CHECK(trace.r_values[2] <= 1000);
}

TEST_CASE("no-return at horizon one matches the exact mixture") {
  // The first non-spine vertex hangs below j-1 empty spine subtrees with
  // probability 2^-(j+1); it sits at a (j+1)-step displacement, so
  // P(hit) = sum_j 2^-(j+1) p_{j+1}(0) with the return pmf as the oracle.
  auto mu = OffspringDistribution::geometric_critical();
  for (int dim : {4, 5}) {
    auto theta = JumpDistribution::srw(dim);
    auto pmf = analytics::srw_return_pmf(dim, 80);
    double hit = 0.0;
    for (int j = 1; j <= 78; ++j) hit += std::ldexp(1.0, -j - 1) * pmf[j + 1];
    double expected = 1.0 - hit;
    auto rec = spine::estimate_no_return(mu, theta, 1, 200000, 5);
    CHECK(std::fabs(rec.value - expected) <= 4.0 * rec.stderr_);
  }
}

TEST_CASE("no-return monotone in the horizon") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  auto a = spine::estimate_no_return(mu, theta, 100, 20000, 6);
  auto b = spine::estimate_no_return(mu, theta, 1000, 20000, 7);
  double joint = 3.0 * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
  CHECK(a.value >= b.value - joint);
}

TEST_CASE("avoidance probabilities") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);

  auto a = spine::estimate_a(mu, theta, 50000, 8, 10000000);
  CHECK(a.record.value >= mu.pmf(0) - 3.0 * a.record.stderr_);

  // h(0) = 0 exactly: the root sits on the forbidden site.
  auto h0 = spine::estimate_h(mu, theta, Point::zero(5), 2000, 9, 1000000);
  CHECK(h0.record.value == doctest::Approx(0.0));

  // Green lower bound h(y) >= 1 - G(-y).
  analytics::GreenTable green(theta, 4);
  for (auto y : {make_point({1, 0, 0, 0, 0}), make_point({1, 1, -1, 0, 0})}) {
    auto h = spine::estimate_h(mu, theta, y, 50000, 10, 10000000);
    Point ny = Point::zero(5);
    ny -= y;
    CHECK(h.record.value >= 1.0 - green.at(ny) - 3.0 * h.record.stderr_);
  }
}

TEST_CASE("conditioned range guards") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  // n = 1: two-vertex tree, range is 1 or 2, so R/n lies in [1, 2].
  auto rec = spine::conditioned_range(mu, theta, 1, 500, 11);
  CHECK(rec.value >= 1.0);
  CHECK(rec.value <= 2.0);

  auto binary = OffspringDistribution::from_table({{0, 0.5}, {2, 0.5}});
  CHECK_THROWS_AS(spine::conditioned_range(binary, theta, 3, 10, 12),
                  InfeasibleSize);
}

TEST_CASE("replica blocks are exchangeable") {
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  const int reps = 200;
  std::vector<double> vals(reps);
  for (int rep = 0; rep < reps; ++rep)
    vals[rep] = spine::range_process(mu, theta, 10000, {}, 13, rep).r_over_n;
  // Permutation sanity: the even/odd block mean gap is typical under random
  // relabeling.
  double even = 0, odd = 0;
  for (int rep = 0; rep < reps; ++rep) (rep % 2 ? odd : even) += vals[rep];
  double gap = std::fabs(even - odd) * 2.0 / reps;
  RngStream rng(14, 0, 0);
  int more_extreme = 0;
  const int perms = 2000;
  for (int t = 0; t < perms; ++t) {
    double s = 0;
    int picked = 0;
    for (int rep = 0; rep < reps; ++rep) {
      if (rng.next_bit()) {
        s += vals[rep];
        ++picked;
      }
    }
    if (picked == 0 || picked == reps) continue;
    double mean_a = s / picked, mean_b = (even + odd - s) / (reps - picked);
    if (std::fabs(mean_a - mean_b) >= gap) ++more_extreme;
  }
  CHECK(more_extreme / double(perms) > 0.01);
}

TEST_CASE("formula estimator shape") {
  // Degenerate cut: an empty product keeps just the avoidance factor, and
  // every factor lies in (0, 1].
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);
  analytics::GreenTable green(theta, 6);
  spine::HTable h(mu, theta, 4, 20000, 15, 1000000);
  h.attach_green(&green);
  auto res = spine::estimate_c_formula(mu, theta, 0, 50, 16, h, green, 0.9,
                                       0.001);
  CHECK(res.product_mean == doctest::Approx(1.0));
  CHECK(res.record.value == doctest::Approx(0.9).epsilon(1e-6));

  auto res2 = spine::estimate_c_formula(mu, theta, 200, 200, 17, h, green, 0.9,
                                        0.001);
  CHECK(res2.product_mean > 0.0);
  CHECK(res2.product_mean <= 1.0);
  CHECK(res2.product_lower <= res2.product_mean + 1e-12);
  CHECK(res2.product_mean <= res2.product_upper + 1e-12);
  CHECK(h.kappa() >= 1.0);
}
