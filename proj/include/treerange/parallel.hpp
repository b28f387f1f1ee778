#pragma once

// Replica fan-out. Each replica's result depends only on (seed, replica
// index), results land in index order, and the reduction happens in a single
// fixed-order pass afterwards, so output is identical for any worker count.

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace treerange {

template <typename T, typename F>
std::vector<T> replicate(std::int64_t reps, int workers, F&& per_replica) {
  std::vector<T> out(static_cast<std::size_t>(reps));
  if (workers <= 1 || reps <= 1) {
    for (std::int64_t r = 0; r < reps; ++r)
      out[static_cast<std::size_t>(r)] = per_replica(static_cast<std::uint64_t>(r));
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (reps + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::int64_t r = lo; r < hi; ++r)
          out[static_cast<std::size_t>(r)] =
              per_replica(static_cast<std::uint64_t>(r));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace treerange
