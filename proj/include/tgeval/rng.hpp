#pragma once

#include <cstddef>
#include <cstdint>

namespace tgeval {

struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for the index-th child of a master seed. Equal to the (index+1)-th
/// output of a splitmix64 stream started at `master`, so children never
/// depend on the order in which they are requested.
constexpr RngSeed derive_seed(RngSeed master, std::uint64_t index) {
  return RngSeed{mix64(master.value + kSplitMixGamma * (index + 1))};
}

/// splitmix64 stream. The only random source used by the library.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(RngSeed seed) : state_(seed.value) {}
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += kSplitMixGamma;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Standard normal pair via Box-Muller; returns the cosine branch and
  /// stores the sine branch in `second`.
  double normal_pair(double& second);

 private:
  std::uint64_t state_;
};

}  // namespace tgeval
