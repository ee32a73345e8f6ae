#pragma once

#include <cmath>
#include <cstdint>

namespace smiso {

// Purpose tags separating the random streams of one experiment. Streams with
// different tags never collide even for the same (seed, example) pair.
enum class StreamPurpose : uint64_t {
  Perturbation = 1,
  Sampling = 2,
  ObjectiveEstimate = 3,
  SynthFeatures = 4,
  SynthHyperplane = 5,
  PoolBuild = 6,
  Generic = 7,
};

namespace detail {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based keyed stream: the value at position t is a pure function of
// (seed, example, purpose, substream, t), so draws are reproducible no matter
// how streams for different examples interleave.
class CounterStream {
 public:
  CounterStream(uint64_t seed, uint64_t example, StreamPurpose purpose,
                uint64_t substream = 0) {
    uint64_t k = detail::splitmix64(seed);
    k = detail::splitmix64(k ^ detail::splitmix64(example));
    k = detail::splitmix64(k ^ detail::splitmix64(static_cast<uint64_t>(purpose)));
    key_ = detail::splitmix64(k ^ detail::splitmix64(substream));
  }

  uint64_t next_u64() { return detail::splitmix64(key_ ^ detail::splitmix64(ctr_++)); }

  // Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // Standard normal via Box-Muller; consumes exactly two counter positions.
  double next_normal() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
};

}  // namespace smiso
