#include "treerange/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "treerange/analytics.hpp"
#include "treerange/brw.hpp"
#include "treerange/parallel.hpp"
#include "treerange/snake.hpp"
#include "treerange/spine.hpp"
#include "treerange/stats.hpp"
#include "treerange/trees.hpp"

namespace treerange::verify {

namespace {

using analytics::GreenTable;
using distributions::JumpDistribution;
using distributions::OffspringDistribution;
using BigInt = boost::multiprecision::cpp_int;

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

CheckResult make_result(const std::string& id, bool pass, double value,
                        double expected, double tol, const std::string& note,
                        const Timer& timer) {
  CheckResult r;
  r.id = id;
  r.pass = pass;
  r.value = value;
  r.expected = expected;
  r.tolerance = tol;
  r.note = note;
  r.elapsed_ms = timer.ms();
  return r;
}

}  // namespace

std::string CheckResult::to_json() const {
  std::ostringstream os;
  os << "{\"id\":\"" << id << "\",\"pass\":" << (pass ? "true" : "false")
     << ",\"value\":" << value << ",\"expected\":" << expected
     << ",\"tolerance\":" << tolerance << "}";
  return os.str();
}

// ---------------------------------------------------------------------------
// Exact identities.

std::vector<CheckResult> exact_identity_checks(std::int64_t kemperman_m,
                                               std::int64_t kemperman_k,
                                               std::int64_t pitman_enum_k,
                                               std::int64_t pitman_norm_k,
                                               std::uint64_t seed) {
  std::vector<CheckResult> out;

  {  // Hitting-time identity over the full grid, exact big-integer equality.
    Timer t;
    std::int64_t failures = 0, cases = 0;
    for (std::int64_t m = 0; m <= kemperman_m; ++m) {
      for (std::int64_t k = m + 1; k <= kemperman_k; ++k) {
        if ((k + m) % 2 == 0) continue;
        ++cases;
        if (!analytics::kemperman_check(m, k).exact_equal) ++failures;
      }
    }
    out.push_back(make_result("kemperman_grid", failures == 0,
                              double(failures), 0.0, 0.0,
                              std::to_string(cases) + " cases", t));
  }

  {  // Reflected-walk pmf vs exhaustive lifetime-path enumeration, exact.
    Timer t;
    bool ok = true;
    for (std::int64_t k = 1; k <= pitman_enum_k && ok; ++k) {
      std::vector<BigInt> counts(k + 1, 0);
      for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
        std::int64_t z = 0, mn = 0;
        for (std::int64_t b = 0; b < k; ++b) {
          z += (mask >> b) & 1 ? 1 : -1;
          mn = std::min(mn, z);
        }
        ++counts[z - 2 * mn];
      }
      for (std::int64_t m = k % 2; m <= k; m += 2) {
        // counts[m]/2^k must equal 2 (m+1)^2 C(k,(k+m)/2) / ((k+m+2) 2^k).
        BigInt choose = 1;
        for (std::int64_t i = 0; i < (k + m) / 2; ++i) {
          choose *= (k - i);
          choose /= (i + 1);
        }
        if (counts[m] * (k + m + 2) != BigInt(2) * (m + 1) * (m + 1) * choose)
          ok = false;
      }
    }
    out.push_back(make_result("pitman_enumeration", ok, ok ? 0.0 : 1.0, 0.0,
                              0.0, "k <= " + std::to_string(pitman_enum_k), t));
  }

  {  // Rational normalization of the reflected-walk pmf.
    Timer t;
    bool ok = true;
    for (std::int64_t k = 0; k <= pitman_norm_k; ++k)
      if (!snake::pitman_normalization_exact(k)) ok = false;
    out.push_back(make_result("pitman_normalization", ok, ok ? 0.0 : 1.0, 0.0,
                              0.0, "k <= " + std::to_string(pitman_norm_k), t));
  }

  {  // Two-step head return for the d=4 simple walk: 11/32.
    Timer t;
    auto theta = JumpDistribution::srw(4);
    double v = snake::head_return_exact(theta, 2);
    bool ok = std::fabs(v - 11.0 / 32.0) < 1e-13;
    out.push_back(make_result("head_return_k2", ok, v, 11.0 / 32.0, 1e-13,
                              "", t));
  }

  {  // Convolution mass conservation, d=1 exact box to k=1000.
    Timer t;
    auto theta1 = JumpDistribution::srw(1);
    auto conv = analytics::truncated_convolution_probe(theta1, 1000, 1001,
                                                       Point::zero(1));
    double drift = std::fabs(conv.alive_mass + conv.killed_mass - 1.0);
    bool ok = drift <= 1e-12 && conv.killed_mass == 0.0;
    out.push_back(make_result("conv_mass_d1", ok, drift, 0.0, 1e-12, "", t));
  }

  {  // Convolution mass conservation with boundary kill accounting, d=4.
    Timer t;
    auto theta4 = JumpDistribution::srw(4);
    auto conv = analytics::truncated_convolution_probe(theta4, 1000, 10,
                                                       Point::zero(4));
    double drift = std::fabs(conv.alive_mass + conv.killed_mass - 1.0);
    out.push_back(
        make_result("conv_mass_d4", drift <= 1e-12, drift, 0.0, 1e-12, "", t));
  }

  {  // Tree coding roundtrip on random trees.
    Timer t;
    auto mu = OffspringDistribution::geometric_critical();
    RngStream rng(seed, 0, 91);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
      trees::PlaneTree tr;
      try {
        tr = trees::sample_gw(mu, rng, 1000000);
      } catch (const CapExceeded&) {
        continue;
      }
      if (trees::tree_from_lukasiewicz(trees::lukasiewicz(tr)) != tr) ok = false;
    }
    out.push_back(make_result("lukasiewicz_roundtrip", ok, ok ? 0.0 : 1.0, 0.0,
                              0.0, "10000 trees", t));
  }

  {  // Pathwise subadditivity of the range under the shift.
    Timer t;
    auto mu = OffspringDistribution::geometric_critical();
    auto theta = JumpDistribution::srw(4);
    RngStream rng(seed, 1, 92);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
      std::int64_t n = 1 + static_cast<std::int64_t>(rng.next_below(40));
      std::int64_t m = 1 + static_cast<std::int64_t>(rng.next_below(40));
      spine::SpinePrefix prefix;
      try {
        prefix = spine::sample_spine_prefix(mu, theta, rng, 2, n + m + 1, 2000000);
      } catch (const CapExceeded&) {
        continue;
      }
      std::vector<Point> locs = spine::enumerate_locations(prefix, n + m);
      auto count_distinct = [](const std::vector<Point>& pts, std::size_t lo,
                               std::size_t hi) {
        VisitedSet v(pts.empty() ? 1 : pts.front().dim, hi - lo);
        for (std::size_t idx = lo; idx < hi; ++idx) v.insert(pts[idx]);
        return static_cast<std::int64_t>(v.size());
      };
      std::int64_t r_nm = count_distinct(locs, 0, n + m);
      std::int64_t r_n = count_distinct(locs, 0, n);
      // m further entries after n shifts: same locations re-rooted.
      spine::SpinePrefix shifted = prefix;
      for (std::int64_t s = 0; s < n; ++s) shifted = spine::shift_tau(shifted);
      std::vector<Point> locs2 = spine::enumerate_locations(shifted, m);
      std::int64_t r_m_shift =
          count_distinct(locs2, 0, static_cast<std::size_t>(m));
      if (r_nm > r_n + r_m_shift) ok = false;
      // The shifted range equals the distinct count over the tail segment.
      if (r_m_shift != count_distinct(locs, n, n + m)) ok = false;
    }
    out.push_back(
        make_result("range_subadditivity", ok, ok ? 0.0 : 1.0, 0.0, 0.0,
                    "1000 prefixes", t));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Deterministic limit tables.

CheckResult head_return_visit_limit(std::uint64_t) {
  // k P(head at origin) oscillates with the walk's period; the two-point
  // average (k P_k + (k+1) P_{k+1}) / 2 converges to 1/(4 pi^2 sigma^4).
  Timer t;
  auto theta = JumpDistribution::srw(4);
  const double target = 4.0 / (M_PI * M_PI);
  std::vector<std::int64_t> ks = {100, 1000, 10000};
  std::vector<double> pmf = analytics::return_pmf(theta, 10001);
  std::vector<double> errs;
  double v_last = 0.0;
  for (std::int64_t k : ks) {
    double pk = snake::head_return_exact(pmf, k);
    double pk1 = snake::head_return_exact(pmf, k + 1);
    double s = (double(k) * pk + double(k + 1) * pk1) / 2.0;
    errs.push_back(std::fabs(s - target));
    v_last = s;
  }
  bool ok = errs[2] < errs[1] && errs[1] < errs[0] &&
            errs[2] <= 0.05 * target;
  std::ostringstream note;
  note << "errors " << errs[0] << " > " << errs[1] << " > " << errs[2];
  return make_result("head_return_visit_limit", ok, v_last, target,
                     0.05 * target, note.str(), t);
}

CheckResult green_asymptotic_check() {
  Timer t;
  auto theta = JumpDistribution::srw(4);
  const double target = 2.0 / (M_PI * M_PI);
  Point x = Point::zero(4);
  x.c[0] = 40;
  auto g = analytics::green(theta, x, 1e-9);
  double scaled = x.norm2() * g.value;
  bool ok = std::fabs(scaled - target) <= 0.10 * target;
  return make_result("green_asymptotic", ok, scaled, target, 0.10 * target,
                     "|x| = 40", t);
}

CheckResult green_negative_control() {
  // The one-step harmonic residual must flag a corrupted Green table.
  Timer t;
  auto theta = JumpDistribution::srw(4);
  GreenTable table(theta, 3);
  auto residual = [&](auto&& g) {
    double worst = 0.0;
    Point x = Point::zero(4);
    for (x.c[0] = -1; x.c[0] <= 1; ++x.c[0])
      for (x.c[1] = -1; x.c[1] <= 1; ++x.c[1]) {
        double rhs = x.is_zero() ? 1.0 : 0.0;
        for (std::size_t j = 0; j < theta.support().size(); ++j)
          rhs += theta.probabilities()[j] * g(x - theta.support()[j]);
        worst = std::max(worst, std::fabs(g(x) - rhs));
      }
    return worst;
  };
  double clean = residual([&](const Point& p) { return table.at(p); });
  double corrupted = residual([&](const Point& p) {
    return table.at(p) + (p.is_zero() ? 0.05 : 0.0);
  });
  bool ok = clean < 1e-6 && corrupted > 1e-3;
  std::ostringstream note;
  note << "clean residual " << clean << ", corrupted " << corrupted;
  return make_result("green_negative_control", ok, corrupted, 0.05, 1e-3,
                     note.str(), t);
}

// ---------------------------------------------------------------------------
// Statistical invariance.

namespace {

struct ShiftStats {
  int k0 = 0;    // root subtree child count
  int k1 = 0;    // first spine subtree child count
  int size0 = 0; // root subtree size truncated at 10
  int first_dx = 0;  // packed location of the first non-spine vertex
};

int pack_small(const Point& p) {
  int v = 0;
  for (int i = 0; i < p.dim; ++i)
    v = v * 5 + std::clamp(p.c[i], -2, 2) + 2;
  return v;
}

// Statistic category used by the two-sample shift tests.
int stat_bucket(const ShiftStats& s) {
  int k0 = std::min(s.k0, 3);
  int k1 = std::min(s.k1, 3);
  int sz = s.size0 >= 10 ? 2 : (s.size0 >= 3 ? 1 : 0);
  return (k0 * 4 + k1) * 3 + sz;
}

std::optional<ShiftStats> sample_stats(const OffspringDistribution& mu,
                                       const JumpDistribution& theta,
                                       RngStream& rng, int shifts) {
  try {
    spine::SpinePrefix p =
        spine::sample_spine_prefix(mu, theta, rng, 2, shifts + 1, 1000000);
    for (int s = 0; s < shifts; ++s) p = spine::shift_tau(p);
    // Need at least two encoded subtrees for the statistics.
    while (p.trees.size() < 2) {
      spine::SpinePrefix extra =
          spine::sample_spine_prefix(mu, theta, rng, 1, 0, 1000000);
      p.trees.push_back(extra.trees[0]);
      p.locations.push_back(extra.locations[0]);
    }
    ShiftStats st;
    st.k0 = p.trees[0].preorder_children[0];
    st.k1 = p.trees[1].preorder_children[0];
    st.size0 = static_cast<int>(std::min<std::size_t>(p.trees[0].size(), 10));
    // First non-spine vertex in lexicographic order, relative to the root.
    Point first = Point::zero(theta.dim());
    bool found = false;
    for (std::size_t i = 0; i < p.trees.size() && !found; ++i) {
      if (p.trees[i].size() > 1) {
        first = p.locations[i][1] - p.locations[0][0];
        found = true;
      }
    }
    if (!found) return std::nullopt;
    st.first_dx = pack_small(first);
    return st;
  } catch (const CapExceeded&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<CheckResult> invariance_checks(std::int64_t samples,
                                           std::uint64_t seed, int workers) {
  std::vector<CheckResult> out;
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(4);

  {  // Joint law of the two top child counts after one shift vs the exact
     // product form mu(n0) * tail(n1).
    Timer t;
    const int grid = 3;
    std::vector<double> observed(grid * grid + 1, 0.0);
    std::int64_t used = 0;
    auto counts = replicate<std::pair<int, char>>(
        samples, workers, [&](std::uint64_t rep) -> std::pair<int, char> {
          RngStream rng(seed, rep, 93);
          auto st = sample_stats(mu, theta, rng, 1);
          if (!st) return {0, 0};
          int cell = (st->k0 < grid && st->k1 < grid)
                         ? st->k0 * grid + st->k1
                         : grid * grid;
          return {cell, 1};
        });
    for (auto& [cell, ok] : counts) {
      if (!ok) continue;
      ++used;
      observed[cell] += 1.0;
    }
    std::vector<double> expected(grid * grid + 1, 0.0);
    double covered = 0.0;
    for (int n0 = 0; n0 < grid; ++n0)
      for (int n1 = 0; n1 < grid; ++n1) {
        double p = mu.pmf(n0) * mu.tail(n1);
        expected[n0 * grid + n1] = p * double(used);
        covered += p;
      }
    expected[grid * grid] = (1.0 - covered) * double(used);
    auto chi = stats::chi_square_gof(observed, expected);
    out.push_back(make_result("shift_joint_law", chi.p_value >= 0.01,
                              chi.p_value, 0.0, 0.01,
                              "chi2 = " + std::to_string(chi.statistic), t));
  }

  for (int shifts : {1, 3}) {  // Two-sample law comparison before/after.
    Timer t;
    const int buckets = 4 * 4 * 3;
    std::vector<double> before(buckets, 0.0), after(buckets, 0.0);
    std::vector<double> before_dx(626, 0.0), after_dx(626, 0.0);
    auto run = [&](std::uint64_t salt, int nshift, std::vector<double>& hist,
                   std::vector<double>& hist_dx) {
      auto res = replicate<std::pair<int, int>>(
          samples, workers, [&](std::uint64_t rep) -> std::pair<int, int> {
            RngStream rng(seed + salt, rep, 94);
            auto st = sample_stats(mu, theta, rng, nshift);
            if (!st) return {-1, -1};
            return {stat_bucket(*st), st->first_dx};
          });
      for (auto& [b, dx] : res) {
        if (b < 0) continue;
        hist[b] += 1.0;
        hist_dx[dx] += 1.0;
      }
    };
    run(1000, 0, before, before_dx);
    run(2000 + shifts, shifts, after, after_dx);
    auto chi = stats::chi_square_two_sample(before, after);
    auto chi_dx = stats::chi_square_two_sample(before_dx, after_dx);
    bool ok = chi.p_value >= 0.01 && chi_dx.p_value >= 0.01;
    std::ostringstream note;
    note << "stat p = " << chi.p_value << ", location p = " << chi_dx.p_value;
    out.push_back(make_result(
        "shift_invariance_" + std::to_string(shifts), ok,
        std::min(chi.p_value, chi_dx.p_value), 0.0, 0.01, note.str(), t));
  }

  {  // Excursion head range law vs spatial-tree range law at n = 200.
    Timer t;
    const std::int64_t n = 200, reps = 10000;
    auto a = replicate<double>(reps, workers, [&](std::uint64_t rep) {
      RngStream rng(seed, rep, 95);
      return double(snake::sample_excursion_range(n, theta, rng));
    });
    auto b = replicate<double>(reps, workers, [&](std::uint64_t rep) {
      RngStream rng(seed, rep, 96);
      trees::PlaneTree tr = trees::sample_uniform_plane_tree(n + 1, rng);
      return double(trees::range_of(trees::assign_locations(tr, theta, rng)));
    });
    double d = stats::ks_two_sample(a, b);
    double crit = stats::ks_critical(0.01, double(reps) / 2.0);
    out.push_back(make_result("excursion_range_law", d < crit, d, 0.0, crit,
                              "two-sample KS", t));
  }

  {  // Swap symmetry of the two arms at k = 2 given a head return.
    Timer t;
    auto res = snake::symmetry_check(theta, 2, 200000, seed);
    bool ok = res.chi_square.p_value >= 0.01 && res.arm_chi_square.p_value >= 0.01;
    std::ostringstream note;
    note << res.hits << " hits, p = " << res.chi_square.p_value
         << ", arm p = " << res.arm_chi_square.p_value;
    out.push_back(make_result("snake_swap_symmetry", ok,
                              std::min(res.chi_square.p_value,
                                       res.arm_chi_square.p_value),
                              0.0, 0.01, note.str(), t));
  }

  {  // Total progeny law vs the killed-walk DP for one initial particle.
    Timer t;
    const std::int64_t reps = 100000, kmax = 9;
    std::vector<double> pmf = brw::progeny_pmf_exact(mu, 1, kmax);
    auto ns = replicate<std::int64_t>(reps, workers, [&](std::uint64_t rep) {
      RngStream rng(seed, rep, 97);
      return brw::brw_run(1, mu, theta, rng, 10000, /*track_range=*/false)
          .progeny;
    });
    std::vector<double> observed(kmax + 1, 0.0), expected(kmax + 1, 0.0);
    for (std::int64_t n : ns) {
      if (n <= kmax) observed[n - 1] += 1.0;
      else observed[kmax] += 1.0;
    }
    double covered = 0.0;
    for (std::int64_t k = 1; k <= kmax; ++k) {
      expected[k - 1] = pmf[k] * double(reps);
      covered += pmf[k];
    }
    expected[kmax] = (1.0 - covered) * double(reps);
    auto chi = stats::chi_square_gof(observed, expected);
    out.push_back(make_result("progeny_law", chi.p_value >= 0.01, chi.p_value,
                              0.0, 0.01,
                              "chi2 = " + std::to_string(chi.statistic), t));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Constant cross-consistency (d = 5).

std::vector<CheckResult> constant_consistency_checks(std::uint64_t seed,
                                                     int workers) {
  std::vector<CheckResult> out;
  auto mu = OffspringDistribution::geometric_critical();
  auto theta = JumpDistribution::srw(5);

  Timer t_all;
  auto range_est =
      spine::estimate_infinite_range(mu, theta, 1000000, 400, seed, workers);
  auto noret_est =
      spine::estimate_no_return(mu, theta, 1000000, 10000, seed + 1, workers);

  GreenTable green(theta, 12);
  spine::HTable h(mu, theta, 8, 600000, seed + 2, 4000000);
  h.attach_green(&green);
  auto a = spine::estimate_a(mu, theta, 400000, seed + 3, 100000000, workers);
  auto formula = spine::estimate_c_formula(mu, theta, 10000, 2000, seed + 4, h,
                                           green, a.record.value,
                                           a.record.stderr_, workers);
  auto cond = spine::conditioned_range(mu, theta, 100000, 300, seed + 5, workers);

  auto pairwise = [&](const std::string& id, double v1, double s1, double v2,
                      double s2) {
    double gap = std::fabs(v1 - v2);
    double tol = 3.0 * std::sqrt(s1 * s1 + s2 * s2);
    std::ostringstream note;
    note << v1 << " vs " << v2;
    out.push_back(make_result(id, gap <= tol, gap, 0.0, tol, note.str(), t_all));
  };
  pairwise("consistency_range_noreturn", range_est.value, range_est.stderr_,
           noret_est.value, noret_est.stderr_);
  pairwise("consistency_range_formula", range_est.value, range_est.stderr_,
           formula.record.value, formula.record.stderr_);
  pairwise("consistency_noreturn_formula", noret_est.value, noret_est.stderr_,
           formula.record.value, formula.record.stderr_);

  {
    double gap = std::fabs(cond.value - range_est.value);
    double tol = 0.10 * range_est.value;
    std::ostringstream note;
    note << cond.value << " vs " << range_est.value;
    out.push_back(make_result("consistency_conditioned", gap <= tol, gap, 0.0,
                              tol, note.str(), t_all));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Critical-dimension trends (d = 4).

std::vector<CheckResult> critical_dimension_checks(std::uint64_t seed,
                                                   int workers,
                                                   bool full_scale) {
  std::vector<CheckResult> out;
  auto theta = JumpDistribution::srw(4);
  const double free_target = M_PI * M_PI / 4.0;
  const double excursion_target = M_PI * M_PI / 2.0;

  {
    Timer t;
    std::vector<std::int64_t> ns = full_scale
                                       ? std::vector<std::int64_t>{100000, 1000000, 10000000}
                                       : std::vector<std::int64_t>{10000, 100000, 1000000};
    std::vector<std::int64_t> reps = full_scale
                                         ? std::vector<std::int64_t>{120, 60, 30}
                                         : std::vector<std::int64_t>{60, 30, 15};
    std::vector<double> errs, vals;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      auto res = snake::free_range(theta, ns[i], reps[i], seed + i, workers);
      vals.push_back(res.record.value);
      errs.push_back(std::fabs(res.record.value - free_target));
    }
    bool monotone = errs[2] < errs[1] && errs[1] < errs[0];
    bool within = errs[2] <= 0.25 * free_target;
    std::ostringstream note;
    note << "values " << vals[0] << ", " << vals[1] << ", " << vals[2];
    out.push_back(make_result("free_snake_trend", monotone && within, vals[2],
                              free_target, 0.25 * free_target, note.str(), t));
  }

  {
    Timer t;
    const std::int64_t n = full_scale ? 1000000 : 100000;
    const std::int64_t reps = full_scale ? 60 : 40;
    const double scale = std::log(double(n)) / double(n);
    auto vals = replicate<double>(reps, workers, [&](std::uint64_t rep) {
      RngStream rng(seed, rep, 25);
      return scale * double(snake::sample_excursion_range(n, theta, rng));
    });
    auto ms = stats::mean_stderr(vals);
    bool ok = std::fabs(ms.mean - excursion_target) <= 0.30 * excursion_target;
    out.push_back(make_result("excursion_range_trend", ok, ms.mean,
                              excursion_target, 0.30 * excursion_target,
                              "stderr " + std::to_string(ms.stderr_), t));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Branching-walk laws.

std::vector<CheckResult> brw_law_checks(std::uint64_t seed, int workers) {
  std::vector<CheckResult> out;
  auto mu = OffspringDistribution::geometric_critical();
  auto theta5 = JumpDistribution::srw(5);

  {  // N/p^2 vs the scaled hitting-time law, censoring-aware.
    Timer t;
    const std::int64_t p = 100, reps = 10000, cap = 100000000;
    auto res = brw::ratio_experiment(p, mu, theta5, reps, seed, cap,
                                     /*track_range=*/false, workers);
    std::vector<double> sample = res.n_over_p2;  // +inf for truncated
    std::sort(sample.begin(), sample.end());
    const double censor_at = double(cap) / double(p) / double(p) * 0.99;
    double d = 0.0;
    const double sigma_mu2 = mu.variance();
    std::size_t n_all = sample.size();
    for (std::size_t i = 0; i < n_all; ++i) {
      if (sample[i] > censor_at) break;
      double f = brw::scaled_j_cdf(sample[i], sigma_mu2);
      d = std::max(d, std::fabs(double(i + 1) / n_all - f));
      d = std::max(d, std::fabs(f - double(i) / n_all));
    }
    double crit = stats::ks_critical(0.01, double(n_all));
    std::ostringstream note;
    note << res.truncated << " truncated";
    out.push_back(
        make_result("brw_progeny_ks", d < crit, d, 0.0, crit, note.str(), t));
  }

  {  // Concentration of R/N: interquartile range shrinks from p=10 to p=100.
    Timer t;
    auto res10 = brw::ratio_experiment(10, mu, theta5, 2000, seed + 1,
                                       100000000, true, workers);
    auto res100 = brw::ratio_experiment(100, mu, theta5, 2000, seed + 2,
                                        100000000, true, workers);
    auto iqr = [](std::vector<double> v) {
      return stats::quantile(v, 0.75) - stats::quantile(v, 0.25);
    };
    double i10 = iqr(res10.r_over_n), i100 = iqr(res100.r_over_n);
    std::ostringstream note;
    note << "IQR p=10: " << i10 << ", p=100: " << i100;
    out.push_back(make_result("brw_ratio_concentration", i100 < i10, i100, i10,
                              0.0, note.str(), t));
  }

  return out;
}

// ---------------------------------------------------------------------------
// Positivity diagnostic.

std::vector<CheckResult> suffcond_checks(std::uint64_t seed, int workers) {
  std::vector<CheckResult> out;
  auto mu = OffspringDistribution::geometric_critical();

  {
    Timer t;
    auto theta = JumpDistribution::srw(5);
    GreenTable table(theta, 12);
    auto res = analytics::suffcond_diagnostic(mu, theta, 10000, 100000, 201,
                                              seed, table, {}, workers);
    bool ok = std::fabs(res.median_drift) < 0.05;
    out.push_back(make_result("suffcond_d5_stabilizes", ok, res.median_drift,
                              0.0, 0.05, "", t));
  }
  {
    Timer t;
    auto theta = JumpDistribution::srw(4);
    GreenTable table(theta, 20);
    auto res = analytics::suffcond_diagnostic(mu, theta, 10000, 100000, 201,
                                              seed + 1, table, {}, workers);
    bool ok = res.median_drift < -0.05;
    out.push_back(make_result("suffcond_d4_drifts_down", ok, res.median_drift,
                              -0.05, 0.0, "", t));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<CheckResult> run_checks(Level level, int workers,
                                    std::uint64_t seed) {
  std::vector<CheckResult> out;
  const bool full = level == Level::kFull;

  auto append = [&](std::vector<CheckResult> v) {
    for (auto& c : v) out.push_back(std::move(c));
  };

  if (full) {
    append(exact_identity_checks(20, 201, 20, 200, seed));
  } else {
    append(exact_identity_checks(10, 51, 12, 64, seed));
  }

  {  // Harmonic identity for the Green table.
    Timer t;
    auto theta = JumpDistribution::srw(4);
    const std::int32_t probe_radius = full ? 10 : 3;
    GreenTable table(theta, probe_radius + 1);
    double worst = 0.0;
    Point x = Point::zero(4);
    std::function<void(int)> rec = [&](int i) {
      if (i == 4) {
        double rhs = x.is_zero() ? 1.0 : 0.0;
        for (std::size_t j = 0; j < theta.support().size(); ++j)
          rhs += theta.probabilities()[j] * table.at(x - theta.support()[j]);
        worst = std::max(worst, std::fabs(table.at(x) - rhs));
        return;
      }
      for (x.c[i] = -probe_radius; x.c[i] <= probe_radius; ++x.c[i]) rec(i + 1);
      x.c[i] = 0;
    };
    rec(0);
    out.push_back(make_result("green_harmonic", worst < 1e-6, worst, 0.0, 1e-6,
                              "box radius " + std::to_string(probe_radius), t));
  }
  out.push_back(green_negative_control());

  if (full) {
    out.push_back(head_return_visit_limit(seed));
    out.push_back(green_asymptotic_check());
    append(invariance_checks(100000, seed, workers));
    append(constant_consistency_checks(seed, workers));
    append(critical_dimension_checks(seed, workers, true));
    append(brw_law_checks(seed, workers));
    append(suffcond_checks(seed, workers));
  } else {
    append(invariance_checks(20000, seed, workers));
  }
  return out;
}

}  // namespace treerange::verify
