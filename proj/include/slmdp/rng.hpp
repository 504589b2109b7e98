#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>

namespace slmdp {

// Counter-based pseudo-random streams. Each draw is a stateless hash of
// (key, counter), so a stream can be reconstructed from its key alone and
// disjoint keys give independent reproducible sequences. This is what makes
// episode-level parallelism and byte-for-byte replay cheap: the env derives
// one child stream per (episode, purpose) and never shares mutable RNG state.

inline constexpr std::uint64_t kRngGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

class RngStream {
 public:
  RngStream() : key_(0) {}
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kRngGamma); }

  // Uniform in [0,1) with 53-bit resolution. ldexp by a power of two is exact,
  // so the result is a deterministic function of the bits on any IEEE platform.
  double next_double() { return std::ldexp(static_cast<double>(next_u64() >> 11), -53); }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform over {0,...,n-1}, exactly (rejection sampling, no modulo bias).
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % n;
    }
  }

  // Independent stream addressed by (this stream's key, tag). Does not consume
  // from or perturb the parent.
  RngStream child(std::uint64_t tag) const { return RngStream(mix64(key_ ^ mix64(tag + kRngGamma))); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline RngStream derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = mix64(seed + kRngGamma);
  for (std::uint64_t p : path) k = mix64(k ^ mix64(p + kRngGamma));
  return RngStream(k);
}

}  // namespace slmdp
