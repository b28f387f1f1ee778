#pragma once

// Counter-based random number generation for reproducible parallel Monte
// Carlo. Each replica owns a stream derived purely from (seed, replica,
// domain), so results do not depend on worker count or scheduling.

#include <array>
#include <cstdint>
#include <cmath>
#include <limits>
#include <vector>

namespace treerange {

// Philox-4x32-10 counter-based generator.
// Key = 64-bit seed, counter = (block_lo, block_hi, replica, domain).
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t replica, std::uint32_t domain = 0)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(replica)),
        ctr3_(static_cast<std::uint32_t>(replica >> 32) ^ (domain * 0x9E3779B9u)) {}

  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()() {
    if (have_ == 0) refill();
    return out_[--have_];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = (*this)();
    return (hi << 32) | (*this)();
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via 128-bit multiply-shift.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bit() { return (next_u64() & 1u) != 0; }

  // Standard normal via polar Box-Muller.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static void round(std::uint32_t& c0, std::uint32_t& c1, std::uint32_t& c2,
                    std::uint32_t& c3, std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    std::uint64_t p0 = M0 * c0;
    std::uint64_t p1 = M1 * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    std::uint32_t n0 = hi1 ^ c1 ^ k0;
    std::uint32_t n1 = lo1;
    std::uint32_t n2 = hi0 ^ c3 ^ k1;
    std::uint32_t n3 = lo0;
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
  }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int r = 0; r < 10; ++r) {
      round(c0, c1, c2, c3, k0, k1);
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
    have_ = 4;
    ++block_;
  }

  std::uint32_t key0_, key1_, ctr2_, ctr3_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> out_{};
  int have_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

using RngStream = Philox;

// Walker alias table over {0,...,n-1} for a fixed finite pmf.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights) { build(weights); }

  void build(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    long double total = 0.0L;
    for (double w : weights) total += w;
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i)
      scaled[i] = static_cast<double>(weights[i] * n / total);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i)
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back(); small.pop_back();
      std::uint32_t l = large.back(); large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    while (!large.empty()) { prob_[large.back()] = 1.0; large.pop_back(); }
    while (!small.empty()) { prob_[small.back()] = 1.0; small.pop_back(); }
  }

  std::size_t size() const { return prob_.size(); }

  std::uint32_t sample(RngStream& rng) const {
    std::uint64_t i = rng.next_below(prob_.size());
    return rng.next_double() < prob_[i] ? static_cast<std::uint32_t>(i)
                                        : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace treerange
