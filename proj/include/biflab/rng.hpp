#pragma once

// Deterministic pseudorandom streams and low-discrepancy sequences.
// Fixed algorithms with fixed constants, so a 64-bit seed reproduces the
// same stream on every platform (the standard <random> distributions are
// not portable across library implementations).

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace biflab {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// xoshiro256++ generator seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t out = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return out;
  }

  /// Uniform in [0,1) with 53-bit resolution.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Uniform on the closed disk |z - center| <= radius.
  std::complex<double> in_disk(std::complex<double> center, double radius) {
    const double r = radius * std::sqrt(uniform01());
    const double t = 2.0 * kPi * uniform01();
    return center + std::complex<double>(r * std::cos(t), r * std::sin(t));
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

/// Halton radical-inverse value for a 1-based index.
inline double halton(std::uint64_t index, std::uint32_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= double(base);
    r += f * double(index % base);
    index /= base;
  }
  return r;
}

/// k-th point of a Halton sequence mapped to the disk |z - center| <= radius.
/// Bases (2,3) for dim=0, (5,7) for dim=1, so multi-dimensional seeds stay
/// uncorrelated.
inline std::complex<double> halton_disk(std::uint64_t index,
                                        std::complex<double> center,
                                        double radius, int dim = 0) {
  static constexpr std::uint32_t bases[4] = {2, 3, 5, 7};
  const double u = halton(index, bases[2 * (dim & 1)]);
  const double v = halton(index, bases[2 * (dim & 1) + 1]);
  const double r = radius * std::sqrt(u);
  const double t = 2.0 * 3.14159265358979323846 * v;
  return center + std::complex<double>(r * std::cos(t), r * std::sin(t));
}

}  // namespace biflab
