#include "qkdnet/mac.hpp"

#include <array>
#include <cmath>

#include "qkdnet/error.hpp"

namespace qkdnet {
namespace {

constexpr std::array<std::uint64_t, kMaxWordBits> kReductionTable = {
    0x3,        0x7,       0xb,        0x13,       0x25,       0x43,
    0x83,       0x11b,     0x203,      0x409,      0x805,      0x1009,
    0x201b,     0x4021,    0x8003,     0x1002b,    0x20009,    0x40009,
    0x80027,    0x100009,  0x200005,   0x400003,   0x800021,   0x100001b,
    0x2000009,  0x400001b, 0x8000027,  0x10000003, 0x20000005, 0x40000003,
    0x80000009, 0x10000008d,
};

void check_word_bits(unsigned w) {
  if (w < kMinWordBits || w > kMaxWordBits) {
    throw Error(ErrorKind::kParameterViolation,
                "MAC word size must be in [1,32], got " + std::to_string(w));
  }
}

std::uint64_t word_at(const BitString& m, std::size_t first, unsigned w) {
  // Big-endian w-bit block starting at 1-based `first`, zero-padded past the end.
  std::uint64_t v = 0;
  for (unsigned j = 0; j < w; ++j) {
    const std::size_t idx = first + j;
    v = (v << 1) | ((idx <= m.size() && m.bit(idx)) ? 1U : 0U);
  }
  return v;
}

}  // namespace

std::uint64_t reduction_polynomial(unsigned word_bits) {
  check_word_bits(word_bits);
  return kReductionTable[word_bits - 1];
}

Gf2w::Gf2w(unsigned word_bits)
    : word_bits_(word_bits),
      modulus_(reduction_polynomial(word_bits)),
      mask_((std::uint64_t{1} << word_bits) - 1) {}

std::uint64_t Gf2w::mul(std::uint64_t a, std::uint64_t b) const noexcept {
  a &= mask_;
  b &= mask_;
  std::uint64_t r = 0;
  const std::uint64_t top = std::uint64_t{1} << word_bits_;
  while (b != 0) {
    if (b & 1U) {
      r ^= a;
    }
    b >>= 1;
    a <<= 1;
    if (a & top) {
      a ^= modulus_;
    }
  }
  return r;
}

void MacParams::validate() const { check_word_bits(word_bits); }

std::size_t block_count(const MacParams& params, std::size_t message_bits) {
  params.validate();
  return (message_bits + params.word_bits - 1) / params.word_bits + 1;
}

double impersonation_bound(const MacParams& params, std::size_t message_bits) {
  const auto blocks = static_cast<double>(block_count(params, message_bits));
  return std::ldexp(blocks, -static_cast<int>(params.word_bits));
}

Tag tag(const MacParams& params, const MacKey& key, const BitString& message) {
  params.validate();
  const unsigned w = params.word_bits;
  if (key.material.size() != params.key_bits()) {
    throw Error(ErrorKind::kLengthMismatch,
                "MAC key must be " + std::to_string(params.key_bits()) +
                    " bits, got " + std::to_string(key.material.size()));
  }
  if (message.size() > params.max_message_bits()) {
    throw Error(ErrorKind::kParameterViolation,
                "message of " + std::to_string(message.size()) +
                    " bits does not fit a " + std::to_string(w) +
                    "-bit length block");
  }
  const Gf2w field(w);
  const std::uint64_t x = word_at(key.material, 1, w);
  const std::uint64_t y = word_at(key.material, w + 1, w);

  std::uint64_t acc = 0;
  for (std::size_t first = 1; first <= message.size(); first += w) {
    acc = field.mul(acc ^ word_at(message, first, w), x);
  }
  acc = field.mul(acc ^ static_cast<std::uint64_t>(message.size()), x);
  return Tag{BitString::from_uint(acc ^ y, w)};
}

bool verify(const MacParams& params, const MacKey& key,
            const BitString& message, const Tag& t) {
  return tag(params, key, message) == t;
}

std::pair<MacKey, MacKey> split_for_two_messages(const MacParams& params,
                                                 const BitString& key2) {
  params.validate();
  const std::size_t half = params.key_bits();
  if (key2.size() != 2 * half) {
    throw Error(ErrorKind::kOutOfRange,
                "two-message key must be " + std::to_string(2 * half) +
                    " bits, got " + std::to_string(key2.size()));
  }
  auto [first, second] = split_key(key2, half);
  return {MacKey{std::move(first)}, MacKey{std::move(second)}};
}

}  // namespace qkdnet
