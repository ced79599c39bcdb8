#pragma once

#include <cstdint>
#include <random>

namespace rsm {

/// SplitMix64 finalizer. Used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Child seed for stream `index` of `master`. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded generator whose draws are identical on every standard library.
///
/// std::mt19937_64 is fully specified by the standard, but the distribution
/// classes are not, so the transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, one cached deviate).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rsm
