// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "afsense/types.hpp"

namespace afsense {

// Deterministic, splittable random stream.
//
// All distributions are implemented on top of the raw 64-bit engine output so
// a given (seed, call sequence) produces the same bytes on every platform;
// std::normal_distribution and friends are implementation-defined and are not
// used. Substreams are derived from the parent key, not the parent state, so
// result of substream(i) does not depend on how much the parent was consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(seed), engine_(mix(seed)) {}

  // Child stream for (purpose, trial, ...) indexing. Independent of the
  // parent's draw position.
  RandomStream substream(std::uint64_t index) const {
    return RandomStream(mix(key_ ^ mix(index + 0x9e3779b97f4a7c15ull)));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = bits();
    while (v >= limit) v = bits();
    return v % n;
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Sample k distinct indices from [lo, hi), ascending.
  std::vector<Index> sample_without_replacement(Index lo, Index hi, Index k);

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace afsense
