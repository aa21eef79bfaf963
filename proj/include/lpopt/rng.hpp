#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lpopt {

namespace detail {

// splitmix64 finalizer; used only to spread seeds over the state space.
constexpr std::uint64_t split_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// xorshift64* generator.  Self-contained so that streams are reproducible
// bit-for-bit across platforms and standard-library versions; std::mt19937
// would be stable too, but its distributions are not.
//
// `stream` selects a decorrelated substream for the same seed, so one
// logical run can draw sampling noise and rounding noise independently.
class QuantRng {
 public:
  explicit QuantRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(detail::split_mix(seed ^ detail::split_mix(stream ^ 0xA5A5A5A5A5A5A5A5ULL))) {
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, n).  Multiply-shift map; the modulo bias is at most
  // n / 2^64, far below anything observable here.
  std::size_t next_index(std::size_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>((u128(next_u64()) * u128(n)) >> 64);
  }

  // Standard normal via Box-Muller.  Always consumes exactly two uniforms
  // and returns one variate, which keeps stream positions predictable.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace lpopt
