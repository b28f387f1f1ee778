#include "treerange/brw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "treerange/errors.hpp"
#include "treerange/parallel.hpp"

namespace treerange::brw {

PointMeasure point_measure_at_origin(int dim, std::int64_t particles) {
  PointMeasure m;
  if (particles > 0) {
    m.counts.emplace_back(Point::zero(dim), particles);
    m.total = particles;
  }
  return m;
}

PointMeasure brw_step(const PointMeasure& state, const OffspringDistribution& mu,
                      const JumpDistribution& theta, RngStream& rng) {
  PointMeasure next;
  std::vector<std::pair<Point, std::int64_t>> scratch;
  for (const auto& [x, count] : state.counts) {
    for (std::int64_t i = 0; i < count; ++i) {
      std::int64_t kids = mu.sample(rng);
      for (std::int64_t c = 0; c < kids; ++c)
        scratch.emplace_back(x + theta.sample(rng), std::int64_t{1});
    }
  }
  std::sort(scratch.begin(), scratch.end());
  for (const auto& [x, one] : scratch) {
    if (!next.counts.empty() && next.counts.back().first == x) {
      next.counts.back().second += one;
    } else {
      next.counts.emplace_back(x, one);
    }
    next.total += one;
  }
  return next;
}

BrwRunResult brw_run(std::int64_t p, const OffspringDistribution& mu,
                     const JumpDistribution& theta, RngStream& rng,
                     std::int64_t progeny_cap, bool track_range,
                     const std::vector<Point>* initial_positions) {
  if (p < 1) throw DomainError("initial population must be >= 1");
  BrwRunResult result;

  // Flat particle lists; aggregation by site buys nothing in the run loop.
  std::vector<Point> cur, next;
  if (initial_positions != nullptr) {
    if (static_cast<std::int64_t>(initial_positions->size()) != p)
      throw DomainError("initial positions must match p");
    cur = *initial_positions;
  } else {
    cur.assign(static_cast<std::size_t>(p), Point::zero(theta.dim()));
  }

  VisitedSet visited(theta.dim(), track_range ? 1024 : 8);
  if (track_range)
    for (const Point& x : cur) visited.insert(x);
  result.progeny = p;

  while (!cur.empty() && !result.truncated) {
    next.clear();
    for (const Point& x : cur) {
      std::int64_t kids = mu.sample(rng);
      for (std::int64_t c = 0; c < kids; ++c) {
        Point y = x + theta.sample(rng);
        if (track_range) visited.insert(y);
        next.push_back(y);
      }
      if (result.progeny + static_cast<std::int64_t>(next.size()) > progeny_cap) {
        result.truncated = true;
        break;
      }
    }
    ++result.generations;
    result.progeny += static_cast<std::int64_t>(next.size());
    cur.swap(next);
  }
  result.range = track_range ? static_cast<std::int64_t>(visited.size()) : 0;
  return result;
}

double j_cdf(double s) {
  if (s <= 0.0) throw DomainError("j_cdf requires s > 0");
  // P(J <= s) = 2 (1 - Phi(s^-1/2)) = erfc(1 / sqrt(2 s)).
  return std::erfc(1.0 / std::sqrt(2.0 * s));
}

double scaled_j_cdf(double s, double sigma_mu2) {
  if (s <= 0.0) return 0.0;
  return j_cdf(sigma_mu2 * s);
}

RatioExperimentResult ratio_experiment(std::int64_t p,
                                       const OffspringDistribution& mu,
                                       const JumpDistribution& theta,
                                       std::int64_t reps, std::uint64_t seed,
                                       std::int64_t progeny_cap,
                                       bool track_range, int workers) {
  RatioExperimentResult out;
  out.runs = replicate<BrwRunResult>(reps, workers, [&](std::uint64_t rep) {
    RngStream rng(seed, rep, /*domain=*/41);
    return brw_run(p, mu, theta, rng, progeny_cap, track_range);
  });
  for (const BrwRunResult& r : out.runs) {
    if (r.truncated) {
      ++out.truncated;
      out.n_over_p2.push_back(std::numeric_limits<double>::infinity());
    } else {
      if (track_range)
        out.r_over_n.push_back(double(r.range) / double(r.progeny));
      out.n_over_p2.push_back(double(r.progeny) / (double(p) * double(p)));
    }
  }
  return out;
}

std::vector<double> progeny_pmf_exact(const OffspringDistribution& mu,
                                      std::int64_t p, std::int64_t kmax) {
  // N is the first passage of the increment walk (jumps mu(k+1) at k >= -1)
  // to -p. DP over the walk's level, killed at -p. Geometric offspring is
  // truncated at 2^-65 total mass, far below any use of these values.
  const std::int64_t maxk = mu.is_geometric() ? 64 : mu.max_k();
  // Level offset: level L means walk value L - p; absorbing at 0.
  const std::int64_t max_level = p + kmax * std::max<std::int64_t>(maxk - 1, 1) + 2;
  std::vector<double> cur(max_level, 0.0), nxt(max_level, 0.0);
  cur[p] = 1.0;
  std::vector<double> pmf(kmax + 1, 0.0);
  for (std::int64_t step = 1; step <= kmax; ++step) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::int64_t lv = 1; lv < max_level; ++lv) {
      double w = cur[lv];
      if (w == 0.0) continue;
      for (std::int64_t k = 0; k <= maxk; ++k) {
        double q = mu.pmf(k);
        if (q == 0.0) continue;
        std::int64_t nl = lv + k - 1;
        if (nl >= 0 && nl < max_level) nxt[nl] += w * q;
      }
    }
    pmf[step] = nxt[0];
    nxt[0] = 0.0;
    cur.swap(nxt);
  }
  return pmf;
}

}  // namespace treerange::brw
