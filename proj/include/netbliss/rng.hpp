#pragma once

#include <cmath>
#include <cstdint>

#include "netbliss/stats.hpp"

namespace netbliss {

/// Counter-based per-trial random stream. Each (seed, stream) pair yields an
/// independent sequence, so trial results do not depend on how trials are
/// scheduled across workers.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(mix(seed) ^ mix(stream ^ 0x8000000000000000ull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform on the open interval (0,1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return normal_quantile(next_uniform()); }

  double next_exponential() { return -std::log(next_uniform()); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Exact draw from a standard normal conditioned on Z < upper. Inverse-CDF in
/// the central range; below -8 a shifted-exponential rejection sampler keeps
/// full tail accuracy where Phi(upper) is at the edge of double range.
double sample_truncated_normal(double upper, TrialRng& rng);

}  // namespace netbliss
