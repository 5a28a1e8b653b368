// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Deterministic random number generation. A splitmix64 core with explicit
// stream splitting: estimators derive one child generator per logical work
// item (per input, per grid point, per trial), so results do not depend on
// thread count or iteration order.

#pragma once

#include <bit>
#include <cstdint>
#include <cmath>

namespace afm {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Order-sensitive combine for keying child streams off (seed, tag, ...).
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2) + b));
}

inline std::uint64_t key_of(double x) {
  return std::bit_cast<std::uint64_t>(x);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed, 0x5EEDULL)) {}

  // Child stream independent of this generator's consumption so far.
  Rng split(std::uint64_t stream) const { return Rng(mix64(state_, stream)); }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits; bit-identical across platforms.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Inclusive bounds. Modulo bias is irrelevant at sampling scale.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

  double normal() {
    // Box-Muller, no cached spare: keeps copies of this object independent.
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace afm
