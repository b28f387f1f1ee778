#pragma once

// Small fixed-capacity lattice point and a fast visited-set over packed keys.

#include <array>
#include <cstdint>
#include <cstring>
#include <set>
#include <vector>

#include "treerange/errors.hpp"

namespace treerange {

constexpr int kMaxDim = 8;

// Lattice point in Z^d, d <= kMaxDim. Value type, cheap to copy.
struct Point {
  std::array<std::int32_t, kMaxDim> c{};
  std::int32_t dim = 0;

  static Point zero(int d) {
    Point p;
    p.dim = d;
    return p;
  }

  std::int32_t& operator[](int i) { return c[i]; }
  std::int32_t operator[](int i) const { return c[i]; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
  friend bool operator<(const Point& a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) {
      if (a.c[i] != b.c[i]) return a.c[i] < b.c[i];
    }
    return false;
  }

  bool is_zero() const {
    for (int i = 0; i < dim; ++i)
      if (c[i] != 0) return false;
    return true;
  }

  double norm2() const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += double(c[i]) * c[i];
    return s;
  }

  std::int32_t linf() const {
    std::int32_t m = 0;
    for (int i = 0; i < dim; ++i) {
      std::int32_t a = c[i] < 0 ? -c[i] : c[i];
      if (a > m) m = a;
    }
    return m;
  }
};

namespace detail {

// Open-addressing hash set with linear probing over an integer key type.
template <typename Key>
class FlatSet {
 public:
  explicit FlatSet(std::size_t expect = 64) { rehash(table_size_for(expect)); }

  // Returns true if the key was newly inserted.
  bool insert(Key k) {
    // One reserved sentinel value marks empty slots.
    if (k == kEmpty) {
      if (has_sentinel_) return false;
      has_sentinel_ = true;
      ++count_;
      return true;
    }
    if ((count_ + 1) * 2 > slots_.size()) rehash(slots_.size() * 2);
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash(k) & mask;
    while (slots_[i] != kEmpty) {
      if (slots_[i] == k) return false;
      i = (i + 1) & mask;
    }
    slots_[i] = k;
    ++count_;
    return true;
  }

  bool contains(Key k) const {
    if (k == kEmpty) return has_sentinel_;
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash(k) & mask;
    while (slots_[i] != kEmpty) {
      if (slots_[i] == k) return true;
      i = (i + 1) & mask;
    }
    return false;
  }

  std::size_t size() const { return count_; }

  void clear() {
    std::fill(slots_.begin(), slots_.end(), kEmpty);
    count_ = 0;
    has_sentinel_ = false;
  }

 private:
  static constexpr Key kEmpty = static_cast<Key>(-1);

  static std::size_t table_size_for(std::size_t expect) {
    std::size_t n = 64;
    while (n < expect * 2) n <<= 1;
    return n;
  }

  static std::uint64_t hash(Key k) {
    // splitmix64 finalizer, folded over 64-bit halves for wide keys.
    std::uint64_t x;
    if constexpr (sizeof(Key) > 8) {
      x = static_cast<std::uint64_t>(k) ^
          (static_cast<std::uint64_t>(k >> 64) * 0x9E3779B97F4A7C15ull);
    } else {
      x = static_cast<std::uint64_t>(k);
    }
    x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27; x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  void rehash(std::size_t n) {
    std::vector<Key> old = std::move(slots_);
    slots_.assign(n, kEmpty);
    std::size_t mask = n - 1;
    for (Key k : old) {
      if (k == kEmpty) continue;
      std::size_t i = hash(k) & mask;
      while (slots_[i] != kEmpty) i = (i + 1) & mask;
      slots_[i] = k;
    }
  }

  std::vector<Key> slots_;
  std::size_t count_ = 0;
  bool has_sentinel_ = false;
};

}  // namespace detail

// Set of visited lattice points. Coordinates within +-32767 are packed into
// one 64-bit word (d <= 4) or one 128-bit word (d <= 8); anything larger
// falls back to an exact ordered set rather than wrapping silently.
class VisitedSet {
 public:
  explicit VisitedSet(int dim, std::size_t expect = 64)
      : dim_(dim), set64_(dim <= 4 ? expect : 0), set128_(dim > 4 ? expect : 0) {}

  bool insert(const Point& p) {
    if (p.linf() <= 32767) {
      if (dim_ <= 4) return set64_.insert(pack64(p));
      return set128_.insert(pack128(p));
    }
    return overflow_.insert(p).second;
  }

  bool contains(const Point& p) const {
    if (p.linf() <= 32767) {
      if (dim_ <= 4) return set64_.contains(pack64(p));
      return set128_.contains(pack128(p));
    }
    return overflow_.count(p) > 0;
  }

  std::size_t size() const {
    return (dim_ <= 4 ? set64_.size() : set128_.size()) + overflow_.size();
  }

 private:
  static std::uint64_t pack64(const Point& p) {
    std::uint64_t k = 0;
    for (int i = 0; i < p.dim; ++i)
      k |= static_cast<std::uint64_t>(
               static_cast<std::uint16_t>(p.c[i] + 32768)) << (16 * i);
    return k;
  }

  static unsigned __int128 pack128(const Point& p) {
    unsigned __int128 k = 0;
    for (int i = 0; i < p.dim; ++i)
      k |= static_cast<unsigned __int128>(
               static_cast<std::uint16_t>(p.c[i] + 32768)) << (16 * i);
    return k;
  }

  int dim_;
  detail::FlatSet<std::uint64_t> set64_;
  detail::FlatSet<unsigned __int128> set128_;
  std::set<Point> overflow_;
};

}  // namespace treerange
