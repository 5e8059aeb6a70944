#pragma once

#include <cmath>
#include <cstdint>

#include "scfcq/stats.hpp"

namespace scfcq {

// Deterministic splittable RNG. A stream is derived from (seed, index) by
// counter-style mixing, so replications / bootstrap draws get independent
// streams whose output does not depend on scheduling order.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ mix(stream * 0x9E3779B97F4A7C15ULL + 1))) {}

  // Derive a child stream without disturbing this one.
  Rng split(std::uint64_t stream) const {
    return Rng(state_, stream + 0x632BE59BD9B4E019ULL);
  }

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse CDF (deterministic across platforms).
  double normal() { return norm_quantile(uniform()); }

  // Standard exponential.
  double exponential() { return -std::log(uniform()); }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
    return z ^ (z >> 33);
  }

  std::uint64_t state_;
};

}  // namespace scfcq
