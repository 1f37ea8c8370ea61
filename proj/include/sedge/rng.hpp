#pragma once

#include <cmath>
#include <cstdint>

namespace sedge {

// SplitMix64 generator. Chosen over std::mt19937 + std::*_distribution
// because the distributions are not bit-stable across standard library
// implementations; everything here is pinned so seeded runs reproduce
// byte-for-byte anywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Derives an independent child stream; used for per-parameter and
  // per-image streams so results do not depend on generation order.
  Rng split(uint64_t stream) const {
    uint64_t z = state_ ^ (0x9e3779b97f4a7c15ULL * (stream + 0x51ed270b0a1ce86dULL));
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return Rng(z ^ (z >> 33));
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi] inclusive. Modulo bias is irrelevant at the
  // ranges used here and keeps the draw sequence trivially reproducible.
  int next_int(int lo, int hi) {
    if (hi <= lo) return lo;
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool next_bool() { return (next_u64() & 1ULL) != 0; }

  // Standard normal via Box-Muller; always consumes exactly two draws.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  uint64_t state_;
};

}  // namespace sedge
