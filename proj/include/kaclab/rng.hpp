#pragma once

#include <cstdint>
#include <limits>

namespace kaclab {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stage tags for counter-based stream splitting. Each (seed, index, tag)
/// triple addresses an independent stream regardless of evaluation order.
enum class Stage : std::uint64_t {
  Initial = 1,
  Simulate = 2,
  AngularResample = 3,
  Sphere = 4,
  Walkers = 5,
  Calibration = 6,
  Audit = 7,
  Grid = 8,
};

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index,
                                    Stage stage) noexcept {
  std::uint64_t h = splitmix64(master ^ (static_cast<std::uint64_t>(stage) *
                                        0xD1B54A32D192ED03ULL));
  return splitmix64(h + splitmix64(index));
}

/// xoshiro256++ engine; satisfies UniformRandomBitGenerator so it composes
/// with the <random> distributions.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += 0x9E3779B97F4A7C15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      w = z ^ (z >> 31);
    }
  }

  Xoshiro256pp(std::uint64_t master, std::uint64_t index, Stage stage) noexcept
      : Xoshiro256pp(stream_seed(master, index, stage)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Lemire's multiply-shift, bias < 2^-40
  /// for the small bounds used here.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const unsigned __int128 m =
        static_cast<unsigned __int128>((*this)()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace kaclab
