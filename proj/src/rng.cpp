#include "qkdnet/rng.hpp"

#include "qkdnet/error.hpp"

namespace qkdnet {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorKind::kOutOfRange, "Rng::below(0)");
  }
  // Rejection on the top multiple of bound keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t x = engine_();
  while (x > limit) {
    x = engine_();
  }
  return x % bound;
}

double Rng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) {
    return false;
  }
  if (p >= 1.0) {
    return true;
  }
  return unit() < p;
}

BitString Rng::bits(std::size_t n) {
  BitString out;
  std::size_t remaining = n;
  while (remaining > 0) {
    const std::size_t take = remaining < 64 ? remaining : 64;
    out.append(BitString::from_uint(engine_() >> (64 - take), take));
    remaining -= take;
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

}  // namespace qkdnet
