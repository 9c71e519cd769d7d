#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace sphqmc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

// Deterministic per-replica random stream.  The state is derived from
// (seed, stream_id) by a counter-style SplitMix64 expansion, so replicas can
// be generated in any order on any number of threads and still reproduce the
// same draw sequence.  The generator itself is xoshiro256++.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t x = seed;
    std::uint64_t h = detail::splitmix64(x);
    x = h ^ (stream_id * 0xD2B74407B1CE6E93ULL + 0x8BB84B93962EACC9ULL);
    for (auto& w : state_) w = detail::splitmix64(x);
    // xoshiro must not start from the all-zero state
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal (Marsaglia polar, second value cached).
  double normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    double u, v, q;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      q = u * u + v * v;
    } while (q >= 1.0 || q == 0.0);
    const double f = std::sqrt(-2.0 * std::log(q) / q);
    cached_normal_ = v * f;
    has_cached_normal_ = true;
    return u * f;
  }

  // Complex Gaussian with independent real/imaginary parts of the given
  // standard deviation each (1/sqrt(2) gives the standard complex normal).
  std::complex<double> complex_normal(double part_stddev) {
    const double re = part_stddev * normal();
    const double im = part_stddev * normal();
    return {re, im};
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace sphqmc
