#pragma once

#include <cstdint>

namespace jabber {

// SplitMix64. Chosen over std::mt19937_64 because the output sequence is
// fixed by the algorithm alone: no distribution objects, no
// implementation-defined shuffling, so seeds reproduce byte-identical
// artifacts on every platform.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    // Rejection sampling on the top of the range.
    const std::uint64_t limit = ~0ULL - (~0ULL % bound + 1) % bound;
    std::uint64_t x = next();
    while (x > limit) x = next();
    return x % bound;
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_double01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

// One step of the SplitMix64 output function applied to a raw value.
// Used to derive per-item seeds and selection scores from hashes.
inline std::uint64_t splitmix_once(std::uint64_t x) {
  return SplitMix64(x).next();
}

}  // namespace jabber
