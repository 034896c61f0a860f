#pragma once

// Seeded random streams.
//
// Every stochastic routine takes an explicit 64-bit seed. A stream is
// identified by (seed, stream_id); its engine is std::mt19937_64 seeded with
// splitmix64(seed ^ splitmix64(stream_id + 1)). Monte Carlo replicate r always
// uses stream_id = r, so results do not depend on how replicates are spread
// over worker threads. Uniforms take the top 53 bits of each draw and normal
// variates come from Box-Muller in sin/cos pairs; both are spelled out here
// because the standard library distributions are implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pinstat {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) noexcept {
  return splitmix64(seed ^ splitmix64(stream_id + 1));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) : engine_(stream_seed(seed, stream_id)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_zero() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Standard normal; consecutive calls return the cos and sin halves of one Box-Muller pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pinstat
