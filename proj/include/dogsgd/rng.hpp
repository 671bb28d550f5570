#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace dogsgd {

/// Identifies one sampling event. Every random draw in a run is a pure
/// function of (seed, step, draw index), so results never depend on which
/// thread performed the draw or in what order units were scheduled.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw i of key k is splitmix(seed, step, i).
/// Satisfies UniformRandomBitGenerator but the helpers below should be
/// preferred over <random> distributions, whose output is library-specific.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(RngKey key, std::uint64_t stream = 0) noexcept
      : base_(splitmix64(splitmix64(splitmix64(key.seed) ^ key.step) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return splitmix64(base_ + 0x632be59bd9b4e019ULL * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n) (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    std::uint64_t x = (*this)();
    u128 m = static_cast<u128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<u128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (one value per two uniforms).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace dogsgd
