#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace discourse {

// FNV-1a. Used for stable, platform-independent hashing of identifiers.
inline uint64_t stable_hash64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic RNG. mt19937_64 output is fully specified by the standard,
// and all derived draws below avoid std::*_distribution (whose algorithms
// are implementation-defined), so identical seeds give identical streams
// on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  // Mixes extra salts into a seed, for per-entity substreams.
  static Rng derive(uint64_t seed, std::initializer_list<uint64_t> salts) {
    uint64_t h = splitmix64(seed);
    for (uint64_t s : salts) h = splitmix64(h ^ s);
    return Rng(h);
  }

  uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n) via rejection sampling.
  size_t uniform_index(size_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return static_cast<size_t>(v % n);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform_real() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // First k entries of a Fisher-Yates pass over [0, n): a uniform sample
  // without replacement, in draw order.
  std::vector<size_t> sample_indices(size_t n, size_t k) {
    if (k > n) k = n;
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + uniform_index(n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace discourse
