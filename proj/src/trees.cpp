#include "treerange/trees.hpp"

#include <algorithm>
#include <numeric>

#include "treerange/errors.hpp"

namespace treerange::trees {

PlaneTree tree_from_lukasiewicz(const std::vector<std::int32_t>& increments) {
  if (increments.empty()) throw InvalidPath("empty path");
  std::int64_t x = 0;
  for (std::size_t i = 0; i + 1 < increments.size(); ++i) {
    if (increments[i] < -1) throw InvalidPath("increment below -1");
    x += increments[i];
    if (x < 0) throw InvalidPath("walk hits -1 before the final step");
  }
  if (increments.back() < -1) throw InvalidPath("increment below -1");
  x += increments.back();
  if (x != -1) throw InvalidPath("walk must end at -1");
  PlaneTree t;
  t.preorder_children.resize(increments.size());
  for (std::size_t i = 0; i < increments.size(); ++i)
    t.preorder_children[i] = increments[i] + 1;
  return t;
}

std::vector<std::int32_t> lukasiewicz(const PlaneTree& tree) {
  std::vector<std::int32_t> inc(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i)
    inc[i] = tree.preorder_children[i] - 1;
  return inc;
}

PlaneTree sample_gw(const OffspringDistribution& mu, RngStream& rng,
                    std::int64_t size_cap) {
  PlaneTree t;
  std::int64_t x = 0;
  for (std::int64_t step = 0; step < size_cap; ++step) {
    std::int64_t k = mu.sample(rng);
    t.preorder_children.push_back(static_cast<std::int32_t>(k));
    x += k - 1;
    if (x < 0) return t;
  }
  throw CapExceeded("GW walk exceeded size cap");
}

bool size_feasible(const OffspringDistribution& mu, std::int64_t n) {
  if (n < 1) return false;
  if (mu.is_geometric()) return true;
  // Need n child counts from supp(mu) summing to n-1. Criticality forces
  // 0 in the support, so n-1 must be a nonnegative combination of the
  // positive support values (the count constraint is then automatic since
  // each positive coin contributes at least 1 to the sum).
  std::vector<std::int64_t> coins;
  for (std::int64_t k = 1; k <= mu.max_k(); ++k)
    if (mu.pmf(k) > 0) coins.push_back(k);
  const std::int64_t target = n - 1;
  if (target == 0) return mu.pmf(0) > 0;
  if (coins.empty()) return false;
  const std::int64_t g = mu.support_gcd();
  if (target % g != 0) return false;
  const std::int64_t maxk = coins.back();
  if (target >= maxk * maxk) return true;  // beyond any Frobenius gap
  std::vector<char> dp(target + 1, 0);
  dp[0] = 1;
  for (std::int64_t s = 1; s <= target; ++s)
    for (std::int64_t k : coins)
      if (k <= s && dp[s - k]) { dp[s] = 1; break; }
  return dp[target] != 0;
}

namespace {

// Rotate increments (each >= -1, summing to -1) so the walk first hits -1 at
// the final step: start right after the first position attaining the minimum.
void cycle_rotate(std::vector<std::int32_t>& inc) {
  std::int64_t x = 0, min = 0;
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < inc.size(); ++i) {
    x += inc[i];
    if (x < min) {
      min = x;
      argmin = i;
    }
  }
  std::rotate(inc.begin(), inc.begin() + (argmin + 1) % inc.size(), inc.end());
}

}  // namespace

PlaneTree sample_gw_conditioned_size(const OffspringDistribution& mu,
                                     std::int64_t n, RngStream& rng) {
  if (n < 1) throw DomainError("tree size must be >= 1");
  if (!size_feasible(mu, n))
    throw InfeasibleSize("no tree with " + std::to_string(n) +
                         " vertices under this offspring law");
  std::vector<std::int32_t> inc(n);
  for (;;) {
    std::int64_t sum = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      std::int64_t k = mu.sample(rng);
      inc[i] = static_cast<std::int32_t>(k - 1);
      sum += k - 1;
    }
    if (sum != -1) continue;
    cycle_rotate(inc);
    PlaneTree t;
    t.preorder_children.resize(n);
    for (std::int64_t i = 0; i < n; ++i)
      t.preorder_children[i] = inc[i] + 1;
    return t;
  }
}

std::vector<std::int8_t> sample_dyck_path(std::int64_t n, RngStream& rng) {
  // Uniform arrangement of n up-steps and n+1 down-steps, rotated to stay
  // nonnegative through step 2n; the final down-step is dropped.
  std::vector<std::int8_t> steps(2 * n + 1, -1);
  // Choose the up positions via partial Fisher-Yates on indices.
  std::vector<std::int32_t> idx(2 * n + 1);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t j = i + static_cast<std::int64_t>(rng.next_below(idx.size() - i));
    std::swap(idx[i], idx[j]);
    steps[idx[i]] = 1;
  }
  std::int64_t x = 0, min = 0;
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    x += steps[i];
    if (x < min) {
      min = x;
      argmin = i;
    }
  }
  std::rotate(steps.begin(), steps.begin() + (argmin + 1) % steps.size(),
              steps.end());
  steps.pop_back();
  return steps;
}

PlaneTree sample_uniform_plane_tree(std::int64_t n, RngStream& rng) {
  if (n < 1) throw DomainError("tree size must be >= 1");
  // Contour -> child counts in preorder: a vertex's children are the
  // up-steps leaving it.
  std::vector<std::int8_t> contour = sample_dyck_path(n - 1, rng);
  PlaneTree t;
  t.preorder_children.assign(n, 0);
  std::vector<std::int32_t> stack;
  stack.push_back(0);
  std::int32_t next_vertex = 1;
  for (std::int8_t s : contour) {
    if (s > 0) {
      ++t.preorder_children[stack.back()];
      stack.push_back(next_vertex++);
    } else {
      stack.pop_back();
    }
  }
  return t;
}

SpatialTree assign_locations(const PlaneTree& tree,
                             const JumpDistribution& theta, RngStream& rng) {
  SpatialTree st;
  st.tree = tree;
  st.dim = theta.dim();
  st.locations.resize(tree.size());
  // Preorder walk with an explicit stack of (location, children left).
  struct Frame {
    Point loc;
    std::int32_t remaining;
  };
  std::vector<Frame> stack;
  st.locations[0] = Point::zero(theta.dim());
  stack.push_back({st.locations[0], tree.preorder_children[0]});
  std::size_t next = 1;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.remaining == 0) {
      stack.pop_back();
      continue;
    }
    --top.remaining;
    Point loc = top.loc + theta.sample(rng);
    st.locations[next] = loc;
    stack.push_back({loc, tree.preorder_children[next]});
    ++next;
  }
  return st;
}

std::int64_t range_of(const SpatialTree& st) {
  VisitedSet visited(st.dim, st.locations.size());
  for (const Point& p : st.locations) visited.insert(p);
  return static_cast<std::int64_t>(visited.size());
}

}  // namespace treerange::trees
