#pragma once

#include <cstdint>

namespace fitzcal {

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 output finalizer (shifts 30/27/31).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Vigna's splitmix64. Bit-exact on every platform; the only generator used
// for splitting and synthetic data.
class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += kSplitMixGamma;
    return mix64(state_);
  }

  // Unbiased integer in [0, bound) by rejection: outputs at or above the
  // largest multiple of bound below 2^64 are redrawn. bound must be > 0.
  constexpr std::uint64_t bounded(std::uint64_t bound) {
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = next();
      if (x >= limit) return x % bound;
    }
  }

  // Uniform double in (0, 1]: (top 53 bits + 1) * 2^-53.
  constexpr double uniform_open0() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace fitzcal
