#pragma once

#include <cstdint>

// Deterministic random number generation. Everything that needs randomness
// (match simulation, level sampling, cursor placement, policy sampling) draws
// from an explicitly seeded Rng; no code path touches std::random_device or
// other ambient entropy. Streams are derived from integer seeds with
// splitmix64, so two builds on any platform produce bit-identical runs.

namespace tilebal {

/// One step of splitmix64 from state `x`: returns the output of the reference
/// generator seeded with `x` (so splitmix64(0) == 0xE220A8397B1DCDAF).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives the seed of sub-stream `index` from `base`. Used everywhere a run
/// fans out into independent deterministic streams (one per match, per level,
/// per episode, ...).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x9e3779b97f4a7c15ull));
}

/// xoshiro256** 1.0 (Blackman & Vigna), state seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      word = splitmix64(sm);
      sm += 0x9e3779b97f4a7c15ull;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_u64(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  int uniform_int(int bound) { return static_cast<int>(uniform_u64(static_cast<std::uint64_t>(bound))); }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace tilebal
