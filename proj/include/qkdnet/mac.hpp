#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "qkdnet/bits.hpp"

namespace qkdnet {

inline constexpr unsigned kMinWordBits = 1;
inline constexpr unsigned kMaxWordBits = 32;

/// Reduction polynomial for GF(2^w), including the x^w term. For every
/// supported w this is the numerically smallest irreducible polynomial of
/// degree w (0x11b for w = 8, 0x1002b for w = 16). Part of the tag format.
std::uint64_t reduction_polynomial(unsigned word_bits);

class Gf2w {
 public:
  explicit Gf2w(unsigned word_bits);

  unsigned word_bits() const noexcept { return word_bits_; }
  std::uint64_t modulus() const noexcept { return modulus_; }
  std::uint64_t mask() const noexcept { return mask_; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept;

 private:
  unsigned word_bits_;
  std::uint64_t modulus_;
  std::uint64_t mask_;
};

struct MacParams {
  unsigned word_bits = 8;

  unsigned tag_bits() const noexcept { return word_bits; }
  std::size_t key_bits() const noexcept { return 2 * std::size_t{word_bits}; }
  /// Longest message whose bit length still fits the length block.
  std::size_t max_message_bits() const noexcept {
    return (std::size_t{1} << word_bits) - 1;
  }
  /// Throws ParameterViolation unless 1 <= w <= 32.
  void validate() const;
};

/// Hash key x (first w bits) followed by pad key y (last w bits).
struct MacKey {
  BitString material;
};

struct Tag {
  BitString value;
  bool operator==(const Tag&) const = default;
};

// Polynomial-evaluation hash over GF(2^w) plus a one-time pad:
//
//   blocks b_1..b_{L-1} = message cut into w-bit words, last one zero-padded
//   b_L                 = message bit length
//   tag                 = y + sum_i b_i * x^(L-i+1)
//
// Blocks and field elements are read big-endian (bit 1 is the top bit).
// Forgery after one observed pair succeeds with probability <= L/2^w.
Tag tag(const MacParams& params, const MacKey& key, const BitString& message);

bool verify(const MacParams& params, const MacKey& key,
            const BitString& message, const Tag& t);

/// Cuts a 2 * key_bits() string into two independent single-message keys.
std::pair<MacKey, MacKey> split_for_two_messages(const MacParams& params,
                                                 const BitString& key2);

/// Number of w-bit blocks hashed for a message, length block included.
std::size_t block_count(const MacParams& params, std::size_t message_bits);

/// L / 2^w with L = block_count(params, message_bits).
double impersonation_bound(const MacParams& params, std::size_t message_bits);

}  // namespace qkdnet
