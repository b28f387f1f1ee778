#pragma once

// Brute-force oracles used only by tests: exhaustive enumerations, small
// convolution DPs and quadrature, independent of the library code paths
// they check.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace oracles {

// All plane trees with n vertices as preorder child-count sequences, by
// exhaustive enumeration of walks with increments k-1 that stay nonnegative
// before the last step and end at -1.
inline void enumerate_trees_rec(std::vector<std::vector<std::int32_t>>& out,
                                std::vector<std::int32_t>& cur, int n,
                                int sum) {
  int len = static_cast<int>(cur.size());
  if (len == n) {
    if (sum == -1) out.push_back(cur);
    return;
  }
  for (int k = 0; k <= n - len; ++k) {
    int next = sum + k - 1;
    if (len + 1 < n && next < 0) continue;   // absorbed too early
    if (len + 1 == n && next != -1) continue;
    if (next > n - len - 2 && len + 1 < n) continue;  // cannot come back down
    cur.push_back(k);
    enumerate_trees_rec(out, cur, n, next);
    cur.pop_back();
  }
}

inline std::vector<std::vector<std::int32_t>> all_plane_trees(int n) {
  std::vector<std::vector<std::int32_t>> out;
  std::vector<std::int32_t> cur;
  enumerate_trees_rec(out, cur, n, 0);
  return out;
}

// n-step pmf of the increment walk nu(j) = mu(j+1) by convolution, started
// at 0, no killing. Index offset: value v stored at v + n (v >= -n).
inline std::vector<double> nu_walk_pmf(const std::vector<double>& mu_pmf,
                                       int n) {
  std::int64_t maxk = static_cast<std::int64_t>(mu_pmf.size()) - 1;
  std::vector<double> cur(1, 1.0);  // offset = steps so far
  for (int step = 0; step < n; ++step) {
    std::vector<double> next(cur.size() + maxk, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur[i] == 0.0) continue;
      for (std::int64_t k = 0; k <= maxk; ++k)
        if (mu_pmf[k] > 0.0) next[i + k] += cur[i] * mu_pmf[k];
    }
    cur.swap(next);
  }
  return cur;  // P(walk_n = v) at index v + n
}

// Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int intervals) {
  double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracles
