#pragma once

#include <cstdint>
#include <random>

namespace mindx {

/// Portable random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the samplers below are implemented
/// here rather than with <random> distributions, whose algorithms are
/// implementation-defined. Same seed gives the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal, Marsaglia polar method (second variate cached).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Poisson(mean). Multiplication method below mean 10, Hormann's PTRS
  /// transformed rejection above.
  std::int64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used to derive independent per-cell seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace mindx
