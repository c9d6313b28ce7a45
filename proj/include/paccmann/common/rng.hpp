//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "paccmann/common/hash.hpp"

namespace paccmann::common {

/// Deterministic seeded random source. All randomness in the library flows
/// through explicitly passed Rng instances; no global state. Draws are
/// hand-rolled on top of mt19937_64 so that sequences are pinned by the seed
/// alone (std::*_distribution output is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform index in [0, n). n must be > 0.
  size_t uniform_index(size_t n) { return static_cast<size_t>(next_u64() % n); }

  /// Uniform real in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller; draws two uniforms per call.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * z;
  }

  /// Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Independent stream derived from this rng's seed and a tag.
  Rng fork(std::string_view tag) const {
    return Rng(Fnv1a64().u64(seed_).str(tag).digest());
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace paccmann::common
