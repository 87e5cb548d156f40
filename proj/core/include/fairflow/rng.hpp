#pragma once

#include <cstdint>
#include <random>

#include "fairflow/errors.hpp"

namespace fairflow {

// Thin wrapper over std::mt19937_64 that implements its own bounded-integer
// and unit-interval draws. std::uniform_int_distribution is allowed to differ
// between standard library implementations; the raw engine is not, so doing
// the reduction by hand keeps every seeded run reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  uint64_t below(uint64_t n) {
    if (n == 0) throw InvalidParameter("Rng::below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  // Uniform integer in [lo, hi], inclusive on both ends.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw InvalidParameter("Rng::uniform_int: empty range");
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) {  // full 64-bit range
      return static_cast<int64_t>(gen_());
    }
    return lo + static_cast<int64_t>(below(span));
  }

  // Uniform double in [0, 1) with 53 bits of randomness.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace fairflow
