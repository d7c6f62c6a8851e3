#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace platoon {

/// Derives an independent sub-seed from a master seed and a stream label.
/// Stable across platforms (splitmix64 finalizer over FNV-1a of the label).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

/// Seeded 64-bit engine with portable bounded/real draws (the std
/// distributions are implementation-defined, which would break
/// cross-toolchain reproducibility).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound - 1]; bound must be >= 1.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1).
  double unit();

  bool bernoulli(double p) { return unit() < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace platoon
