#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qkdnet {

/// Fixed-length binary string. The public API is 1-based: bit(1) is the
/// leftmost character of the textual form, so "0101".bit(2) == true.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length);

  /// Parses an ASCII '0'/'1' string. Throws ParseError on any other character.
  static BitString from_string(std::string_view text);

  /// Big-endian: the most significant of the `length` low bits becomes bit 1.
  static BitString from_uint(std::uint64_t value, std::size_t length);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool bit(std::size_t index) const;
  void set_bit(std::size_t index, bool value);
  void flip(std::size_t index);

  /// Bits first..last inclusive; requires 1 <= first <= last <= size().
  BitString slice(std::size_t first, std::size_t last) const;

  void push_back(bool value);
  void append(const BitString& tail);

  /// Inverse of from_uint; requires size() <= 64.
  std::uint64_t to_uint() const;
  std::string to_string() const;

  std::size_t popcount() const noexcept;
  bool is_zero() const noexcept { return popcount() == 0; }

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString lhs, const BitString& rhs) {
    lhs ^= rhs;
    return lhs;
  }

  bool operator==(const BitString& other) const = default;

  // Internal packed form: 0-based bit i lives in words()[i / 64] at bit i % 64.
  // Bits past size() are always zero.
  std::span<const std::uint64_t> words() const noexcept { return words_; }

 private:
  bool get0(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (i & 63)) & 1U;
  }
  void set0(std::size_t i, bool v) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

BitString concat(const BitString& head, const BitString& tail);

/// Bitwise parity across shares. Throws EmptyInput / LengthMismatch.
BitString xor_combine(std::span<const BitString> shares);

/// Inner product mod 2. Throws LengthMismatch.
bool inner_product(const BitString& a, const BitString& b);

/// (K_{1..s}, K_{s+1..|K|}). Throws OutOfRange if s > |K|.
std::pair<BitString, BitString> split_key(const BitString& key, std::size_t s);

}  // namespace qkdnet
