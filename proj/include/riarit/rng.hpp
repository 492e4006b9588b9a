#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace riarit {

/// Seeded random source with portable sampling helpers.
///
/// Only the engine comes from <random>; every distribution is computed here so
/// that traces are identical across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Counter-based split: the stream for (master, keys...) does not depend on
  /// how many other streams were derived before it.
  static Rng derive(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mean, double stddev);

  /// Index drawn proportionally to non-negative weights. Sum must be positive.
  std::size_t categorical(std::span<const double> weights);

private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace riarit
