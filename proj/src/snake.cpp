#include "treerange/snake.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "treerange/errors.hpp"
#include "treerange/parallel.hpp"
#include "treerange/trees.hpp"

namespace treerange::snake {

SnakeState::SnakeState(const JumpDistribution& theta, std::int64_t m)
    : theta_(&theta), zeta_(m), floor_(m) {
  path_.push_back(Point::zero(theta.dim()));  // w(m) = 0
}

void SnakeState::ensure_floor(std::int64_t j, RngStream& rng) {
  while (floor_ > j) {
    // Initial section: w(j-1) = w(j) - fresh jump, memoized once drawn.
    path_.push_front(path_.front() - theta_->sample(rng));
    --floor_;
  }
}

Point SnakeState::value(std::int64_t j, RngStream& rng) {
  if (j > zeta_) throw DomainError("path index above lifetime");
  ensure_floor(j, rng);
  return path_[static_cast<std::size_t>(j - floor_)];
}

SnakeState::StepKind SnakeState::step(RngStream& rng) {
  if (rng.next_bit()) {
    step_append(theta_->sample(rng));
    return StepKind::kAppend;
  }
  step_erase(rng);
  return StepKind::kErase;
}

void SnakeState::step_erase(RngStream& rng) {
  ensure_floor(zeta_ - 1, rng);
  last_erased_ = path_.back();
  path_.pop_back();
  --zeta_;
}

void SnakeState::step_append(const Point& jump) {
  path_.push_back(path_.back() + jump);
  ++zeta_;
}

namespace {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

long double log_choose(std::int64_t n, std::int64_t k) {
  return lgammal(static_cast<long double>(n + 1)) -
         lgammal(static_cast<long double>(k + 1)) -
         lgammal(static_cast<long double>(n - k + 1));
}

BigInt big_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  BigInt c = 1;
  for (std::int64_t i = 0; i < std::min(k, n - k); ++i) {
    c *= (n - i);
    c /= (i + 1);
  }
  return c;
}

}  // namespace

double pitman_pmf(std::int64_t k, std::int64_t m) {
  if (k < 0 || m < 0) throw DomainError("need k, m >= 0");
  if (m > k || ((k + m) % 2) != 0)
    throw DomainError("need m <= k with k + m even");
  // P_0(Y_k = m) = C(k, (k+m)/2) 2^-k.
  long double log_p =
      log_choose(k, (k + m) / 2) - k * 0.6931471805599453094172321214581766L;
  return static_cast<double>(2.0L * (m + 1) * (m + 1) / (k + m + 2) *
                             expl(log_p));
}

bool pitman_normalization_exact(std::int64_t k) {
  BigRat sum = 0;
  for (std::int64_t m = k % 2; m <= k; m += 2) {
    BigRat term(BigInt(2) * (m + 1) * (m + 1) * big_choose(k, (k + m) / 2),
                BigInt(k + m + 2) * (BigInt(1) << static_cast<unsigned>(k)));
    sum += term;
  }
  return sum == 1;
}

double head_return_exact(const std::vector<double>& return_pmf, std::int64_t k) {
  long double s = 0.0L;
  for (std::int64_t m = k % 2; m <= k; m += 2) {
    double pm = m < static_cast<std::int64_t>(return_pmf.size()) ? return_pmf[m] : 0.0;
    if (pm != 0.0) s += pitman_pmf(k, m) * pm;
  }
  return static_cast<double>(s);
}

double head_return_exact(const JumpDistribution& theta, std::int64_t k) {
  if (!theta.symmetric())
    throw DomainError("head return identity requires symmetric theta");
  std::vector<double> pmf = analytics::return_pmf(theta, k);
  return head_return_exact(pmf, k);
}

NoReturnHeadResult estimate_no_return_head(const JumpDistribution& theta,
                                           std::int64_t n, std::int64_t reps,
                                           std::uint64_t seed,
                                           std::optional<std::int64_t> stop_p,
                                           int workers) {
  std::vector<char> flags = replicate<char>(reps, workers, [&](std::uint64_t rep) {
    RngStream rng(seed, rep, /*domain=*/21);
    SnakeState state(theta, 0);
    for (std::int64_t step = 1; step <= n; ++step) {
      state.step(rng);
      if (state.head().is_zero()) return char(0);
      if (stop_p && state.zeta() == -*stop_p) break;
    }
    return char(1);
  });
  std::int64_t survived = 0;
  for (char f : flags) survived += f;
  NoReturnHeadResult out;
  double p = double(survived) / double(reps);
  out.record.value = p;
  out.record.stderr_ = std::sqrt(p * (1.0 - p) / double(reps));
  out.record.reps = reps;
  out.record.seed = seed;
  out.log_scaled = std::log(double(stop_p ? *stop_p : n)) * p;
  return out;
}

ExcursionSample sample_excursion(std::int64_t n, const JumpDistribution& theta,
                                 RngStream& rng) {
  if (n < 1) throw DomainError("excursion length parameter must be >= 1");
  ExcursionSample s;
  s.n = n;
  std::vector<std::int8_t> steps = trees::sample_dyck_path(n, rng);
  s.zeta_path.reserve(2 * n + 1);
  s.head_path.reserve(2 * n + 1);
  std::vector<Point> stack;
  stack.push_back(Point::zero(theta.dim()));
  s.zeta_path.push_back(0);
  s.head_path.push_back(stack.back());
  std::int32_t z = 0;
  for (std::int8_t st : steps) {
    if (st > 0) {
      stack.push_back(stack.back() + theta.sample(rng));
      ++z;
    } else {
      stack.pop_back();
      --z;
    }
    s.zeta_path.push_back(z);
    s.head_path.push_back(stack.back());
  }
  return s;
}

std::int64_t excursion_range(const ExcursionSample& sample) {
  if (sample.head_path.empty()) return 0;
  VisitedSet visited(sample.head_path.front().dim, sample.head_path.size() / 4 + 8);
  for (const Point& p : sample.head_path) visited.insert(p);
  return static_cast<std::int64_t>(visited.size());
}

std::int64_t sample_excursion_range(std::int64_t n, const JumpDistribution& theta,
                                    RngStream& rng) {
  std::vector<std::int8_t> steps = trees::sample_dyck_path(n, rng);
  std::vector<Point> stack;
  stack.push_back(Point::zero(theta.dim()));
  VisitedSet visited(theta.dim(), static_cast<std::size_t>(n / 4 + 8));
  visited.insert(stack.back());
  for (std::int8_t st : steps) {
    if (st > 0) {
      stack.push_back(stack.back() + theta.sample(rng));
      visited.insert(stack.back());
    } else {
      stack.pop_back();
    }
  }
  return static_cast<std::int64_t>(visited.size());
}

FreeRangeResult free_range(const JumpDistribution& theta, std::int64_t n,
                           std::int64_t reps, std::uint64_t seed,
                           int workers) {
  const double scale = std::log(double(n)) / double(n);
  std::vector<double> vals = replicate<double>(reps, workers, [&](std::uint64_t rep) {
    RngStream rng(seed, rep, /*domain=*/22);
    SnakeState state(theta, 0);
    VisitedSet visited(theta.dim(), static_cast<std::size_t>(n / 8 + 8));
    visited.insert(state.head());
    for (std::int64_t step = 1; step <= n; ++step) {
      state.step(rng);
      visited.insert(state.head());
    }
    return scale * double(visited.size());
  });
  FreeRangeResult out;
  auto ms = stats::mean_stderr(vals);
  out.record.value = ms.mean;
  out.record.stderr_ = ms.stderr_;
  out.record.reps = reps;
  out.record.seed = seed;
  long double m2 = 0.0L;
  for (double v : vals) m2 += v * v;
  out.second_moment = static_cast<double>(m2 / reps);
  out.variance = out.second_moment - ms.mean * ms.mean;
  return out;
}

SymmetryCheckResult symmetry_check(const JumpDistribution& theta, std::int64_t k,
                                   std::int64_t reps, std::uint64_t seed) {
  // Conditioned on the head returning to the origin at step k, the pair
  // (depth of the minimum below the start, final height above the minimum)
  // must be exchangeable, and so must the first increments of the two path
  // arms that leave the minimum point.
  const int cap = 8;
  std::vector<double> count_ij(cap * cap, 0.0), count_ji(cap * cap, 0.0);
  std::vector<double> arm_ab(9, 0.0), arm_ba(9, 0.0);
  std::int64_t hits = 0;
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    RngStream rng(seed, static_cast<std::uint64_t>(rep), /*domain=*/23);
    SnakeState state(theta, 0);
    std::int64_t min_z = 0;
    // First increment of the original path above each successive new
    // minimum; values at and right above a new minimum are still original.
    Point arm1_inc = Point::zero(theta.dim());
    for (std::int64_t step = 1; step <= k; ++step) {
      auto kind = state.step(rng);
      if (kind == SnakeState::StepKind::kErase && state.zeta() < min_z) {
        min_z = state.zeta();
        arm1_inc = state.last_erased() - state.head();
      }
    }
    if (!state.head().is_zero()) continue;
    ++hits;
    std::int64_t i = -min_z;
    std::int64_t j = state.zeta() - min_z;
    if (i < cap && j < cap) {
      count_ij[i * cap + j] += 1.0;
      count_ji[j * cap + i] += 1.0;
    }
    if (i >= 1 && j >= 1) {
      Point arm2_inc = state.value(min_z + 1, rng) - state.value(min_z, rng);
      int a = std::clamp(arm1_inc.c[0], -1, 1) + 1;
      int b = std::clamp(arm2_inc.c[0], -1, 1) + 1;
      arm_ab[a * 3 + b] += 1.0;
      arm_ba[b * 3 + a] += 1.0;
    }
  }
  if (hits < 100) throw TooFewHits("only " + std::to_string(hits) + " hits");
  SymmetryCheckResult out;
  out.hits = hits;
  out.chi_square = stats::chi_square_two_sample(count_ij, count_ji);
  out.arm_chi_square = stats::chi_square_two_sample(arm_ab, arm_ba);
  return out;
}

HeadReturnsVsGreen head_returns_vs_green(const JumpDistribution& theta,
                                         const analytics::GreenTable& table,
                                         std::int64_t m, std::int64_t reps,
                                         std::uint64_t seed,
                                         std::int64_t step_cap) {
  // Fix one initial path, then average the number of head visits to the
  // origin before the lifetime first drops by m over snake runs from it.
  RngStream fixture_rng(seed, 0, /*domain=*/24);
  std::vector<Point> w0(m + 1);
  w0[0] = Point::zero(theta.dim());
  for (std::int64_t j = 1; j <= m; ++j)
    w0[j] = w0[j - 1] - theta.sample(fixture_rng);  // w0[j] = W_0(-j)

  double green_sum = 0.0;
  for (std::int64_t j = 0; j < m; ++j) {
    Point neg = Point::zero(theta.dim());
    neg -= w0[j];
    green_sum += table.at(neg);
  }

  std::vector<double> counts(reps);
  std::int64_t capped = 0;
  for (std::int64_t rep = 0; rep < reps; ++rep) {
    RngStream rng(seed, static_cast<std::uint64_t>(rep + 1), /*domain=*/24);
    std::vector<Point> path(w0.rbegin(), w0.rend());  // path[i] = W_0(i - m)
    std::int64_t zeta = 0;
    std::int64_t returns = path.back().is_zero() ? 1 : 0;  // k = 0 term
    std::int64_t steps = 0;
    while (zeta > -m && steps < step_cap) {
      ++steps;
      if (rng.next_bit()) {
        path.push_back(path.back() + theta.sample(rng));
        ++zeta;
      } else {
        path.pop_back();
        --zeta;
      }
      if (zeta > -m && path.back().is_zero()) ++returns;
    }
    if (steps >= step_cap) ++capped;
    counts[rep] = double(returns);
  }
  HeadReturnsVsGreen out;
  auto ms = stats::mean_stderr(counts);
  out.mc_mean = ms.mean;
  out.mc_stderr = ms.stderr_;
  out.green_sum_twice = 2.0 * green_sum;
  out.capped_runs = capped;
  return out;
}

}  // namespace treerange::snake
