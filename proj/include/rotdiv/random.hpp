#pragma once

// Seeded generators and the stream-derivation rule shared by every
// Monte Carlo path in the library.
//
// Streams: every independent unit of work (a frame, a trial, a rotation
// draw) gets its own generator seeded with derive_stream(master, domain,
// index). Results therefore depend only on the master seed, never on the
// number of workers or on scheduling order.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace rotdiv {

/// SplitMix64 step; advances `state` and returns the mixed output.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream id for work item `index` in the named `domain` of a run seeded
/// with `seed`.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t domain,
                                      std::uint64_t index) noexcept {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (domain * 0xd1b54a32d192ed03ULL);
  h = splitmix64(s);
  s = h ^ (index * 0x8cb92ba72f3d8dd7ULL);
  return splitmix64(s);
}

/// xoshiro256** seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator.
class Xoshiro256ss {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256ss(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

using Rng = Xoshiro256ss;

/// Uniform double on [0, 1) with 53 random bits.
template <class G>
double uniform01(G& g) {
  return static_cast<double>(g() >> 11) * 0x1p-53;
}

/// Uniform angle on [0, 2 pi).
template <class G>
double uniform_angle(G& g) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double a = uniform01(g) * two_pi;
  return a < two_pi ? a : 0.0;
}

/// Circularly symmetric complex Gaussian CN(0, variance).
template <class G>
std::complex<double> complex_gaussian(G& g, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(g);
  const double im = normal(g);
  return {re, im};
}

}  // namespace rotdiv
