#pragma once

#include <cstdint>

namespace qcheb {

// Counter-based splittable PRNG (splitmix64 core). Deterministic given a seed,
// cheap to fork into independent streams keyed by (seed, index) so that nested
// simulations stay reproducible regardless of evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n > 0. Rejection-free modulo is fine here:
  // n is tiny relative to 2^64 in every use, bias < 2^-40.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Derives a seed for an independent child stream.
  static std::uint64_t split(std::uint64_t seed, std::uint64_t index) {
    return mix(mix(seed + kGamma) ^ mix(index + 0x8000000000000001ULL));
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace qcheb
