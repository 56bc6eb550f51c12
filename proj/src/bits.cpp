#include "qkdnet/bits.hpp"

#include <bit>

#include "qkdnet/error.hpp"

namespace qkdnet {
namespace {

std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

void check_index(std::size_t index, std::size_t size) {
  if (index < 1 || index > size) {
    throw Error(ErrorKind::kOutOfRange, "bit index " + std::to_string(index) +
                                            " outside 1.." +
                                            std::to_string(size));
  }
}

}  // namespace

BitString::BitString(std::size_t length)
    : words_(words_for(length), 0), size_(length) {}

BitString BitString::from_string(std::string_view text) {
  BitString out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') {
      throw Error(ErrorKind::kParseError,
                  "invalid bit character at offset " + std::to_string(i));
    }
    out.set0(i, c == '1');
  }
  return out;
}

BitString BitString::from_uint(std::uint64_t value, std::size_t length) {
  if (length > 64) {
    throw Error(ErrorKind::kOutOfRange, "from_uint supports at most 64 bits");
  }
  BitString out(length);
  for (std::size_t i = 0; i < length; ++i) {
    out.set0(i, (value >> (length - 1 - i)) & 1U);
  }
  return out;
}

bool BitString::bit(std::size_t index) const {
  check_index(index, size_);
  return get0(index - 1);
}

void BitString::set_bit(std::size_t index, bool value) {
  check_index(index, size_);
  set0(index - 1, value);
}

void BitString::flip(std::size_t index) {
  check_index(index, size_);
  words_[(index - 1) >> 6] ^= std::uint64_t{1} << ((index - 1) & 63);
}

BitString BitString::slice(std::size_t first, std::size_t last) const {
  if (first < 1 || first > last || last > size_) {
    throw Error(ErrorKind::kOutOfRange,
                "slice(" + std::to_string(first) + "," + std::to_string(last) +
                    ") of length " + std::to_string(size_));
  }
  const std::size_t len = last - first + 1;
  const std::size_t offset = first - 1;
  BitString out(len);
  const std::size_t shift = offset & 63;
  const std::size_t base = offset >> 6;
  for (std::size_t w = 0; w < out.words_.size(); ++w) {
    std::uint64_t lo = words_[base + w] >> shift;
    if (shift != 0 && base + w + 1 < words_.size()) {
      lo |= words_[base + w + 1] << (64 - shift);
    }
    out.words_[w] = lo;
  }
  if (len & 63) {
    out.words_.back() &= (std::uint64_t{1} << (len & 63)) - 1;
  }
  return out;
}

void BitString::push_back(bool value) {
  if ((size_ & 63) == 0) {
    words_.push_back(0);
  }
  ++size_;
  set0(size_ - 1, value);
}

void BitString::append(const BitString& tail) {
  if (tail.size_ == 0) {
    return;
  }
  const std::size_t shift = size_ & 63;
  if (shift == 0) {
    words_.insert(words_.end(), tail.words_.begin(), tail.words_.end());
    size_ += tail.size_;
    return;
  }
  const std::size_t new_size = size_ + tail.size_;
  words_.resize(words_for(new_size), 0);
  std::size_t dst = size_ >> 6;
  for (std::uint64_t w : tail.words_) {
    words_[dst] |= w << shift;
    if (dst + 1 < words_.size()) {
      words_[dst + 1] |= w >> (64 - shift);
    }
    ++dst;
  }
  size_ = new_size;
}

std::uint64_t BitString::to_uint() const {
  if (size_ > 64) {
    throw Error(ErrorKind::kOutOfRange, "to_uint supports at most 64 bits");
  }
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < size_; ++i) {
    value = (value << 1) | static_cast<std::uint64_t>(get0(i));
  }
  return value;
}

std::string BitString::to_string() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get0(i)) {
      out[i] = '1';
    }
  }
  return out;
}

std::size_t BitString::popcount() const noexcept {
  std::size_t count = 0;
  for (std::uint64_t w : words_) {
    count += static_cast<std::size_t>(std::popcount(w));
  }
  return count;
}

BitString& BitString::operator^=(const BitString& other) {
  if (other.size_ != size_) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(size_) + " vs " + std::to_string(other.size_));
  }
  for (std::size_t w = 0; w < words_.size(); ++w) {
    words_[w] ^= other.words_[w];
  }
  return *this;
}

BitString concat(const BitString& head, const BitString& tail) {
  BitString out = head;
  out.append(tail);
  return out;
}

BitString xor_combine(std::span<const BitString> shares) {
  if (shares.empty()) {
    throw Error(ErrorKind::kEmptyInput, "xor_combine of no shares");
  }
  BitString out = shares.front();
  for (std::size_t i = 1; i < shares.size(); ++i) {
    out ^= shares[i];
  }
  return out;
}

bool inner_product(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const auto wa = a.words();
  const auto wb = b.words();
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    acc ^= wa[i] & wb[i];
  }
  return (std::popcount(acc) & 1) != 0;
}

std::pair<BitString, BitString> split_key(const BitString& key, std::size_t s) {
  if (s > key.size()) {
    throw Error(ErrorKind::kOutOfRange, "prefix length " + std::to_string(s) +
                                            " exceeds key length " +
                                            std::to_string(key.size()));
  }
  BitString prefix = s == 0 ? BitString() : key.slice(1, s);
  BitString rest = s == key.size() ? BitString() : key.slice(s + 1, key.size());
  return {std::move(prefix), std::move(rest)};
}

}  // namespace qkdnet
