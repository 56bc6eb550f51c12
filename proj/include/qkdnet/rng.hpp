#pragma once

#include <cstdint>
#include <random>

#include "qkdnet/bits.hpp"

namespace qkdnet {

// Seeded generator with platform-independent output: std::mt19937_64 is
// fully specified by the standard and every derived draw below is computed
// here rather than through std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, bound); bound must be nonzero.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform in [0, 1) with 53 bits of resolution.
  double unit();

  /// p <= 0 never fires, p >= 1 always fires.
  bool bernoulli(double p);

  BitString bits(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of trial `index` under `master`: splitmix64(master ^ splitmix64(index)).
std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t index);

}  // namespace qkdnet
