#pragma once

#include <cstdint>

namespace oukit {

/// SplitMix64 (Steele, Lea & Flood 2014). Counter-based: output i is a fixed
/// 64-bit avalanche of seed + (i+1)*GOLDEN_GAMMA, so a stream is a pure
/// function of its seed and draw index on every platform.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  /// Finalizer/avalanche function; also used standalone for seed derivation.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix(state_);
  }

  /// Uniform on the open interval (0, 1): (top 53 bits + 1/2) * 2^-53.
  double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi].
  double next_uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * next_uniform();
  }

  /// Standard normal by the inverse-CDF method (Wichura's AS 241, PPND16).
  /// This is the frozen normal-variate rule for every sampler in the library.
  double next_normal() noexcept;

 private:
  std::uint64_t state_;
};

/// Quantile of the standard normal distribution, Wichura's algorithm AS 241
/// (double-precision PPND16 branch), p in (0, 1).
double normal_quantile(double p) noexcept;

/// Documented seed-splitting rule: two SplitMix64 mixing rounds folding a and
/// b into the master seed. Distinct (a, b) give effectively independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
  std::uint64_t z = SplitMix64::mix(master + SplitMix64::kGoldenGamma * (a + 1));
  return SplitMix64::mix(z + SplitMix64::kGoldenGamma * (b + 1));
}

}  // namespace oukit
