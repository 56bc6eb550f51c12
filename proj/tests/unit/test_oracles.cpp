#include <doctest.h>

#include <bit>
#include <map>

#include "qkdnet/error.hpp"
#include "qkdnet/oracles.hpp"
#include "qkdnet/protocol.hpp"

using qkdnet::BitString;

namespace {

BitString B(const char* s) { return BitString::from_string(s); }

// Integer reference for the literal procedure. Bit i (1-based, leftmost
// first) of a k-bit value v is (v >> (k - i)) & 1.
std::uint64_t reference_final(std::uint64_t key, const std::vector<std::uint64_t>& lambdas,
                              std::size_t k) {
  std::uint64_t trashed = 0;
  for (std::uint64_t l : lambdas) {
    for (std::size_t i = 1; i <= k; ++i) {
      const std::uint64_t mask = std::uint64_t{1} << (k - i);
      if ((l & mask) && !(trashed & mask)) {
        trashed |= mask;
        break;
      }
    }
  }
  std::uint64_t out = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::uint64_t mask = std::uint64_t{1} << (k - i);
    if (!(trashed & mask)) out = (out << 1) | ((key & mask) ? 1 : 0);
  }
  return out;
}

bool reference_uniform(const std::vector<std::uint64_t>& lambdas, std::size_t k) {
  std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> hist;
  std::map<std::uint64_t, std::uint64_t> sizes;
  std::size_t final_bits = 0;
  for (std::uint64_t key = 0; key < (std::uint64_t{1} << k); ++key) {
    std::uint64_t parity = 0;
    for (std::size_t v = 0; v < lambdas.size(); ++v) {
      parity |= static_cast<std::uint64_t>(std::popcount(lambdas[v] & key) & 1) << v;
    }
    ++hist[parity][reference_final(key, lambdas, k)];
    ++sizes[parity];
  }
  std::uint64_t trashed = 0;
  for (std::uint64_t l : lambdas) {
    for (std::size_t i = 1; i <= k; ++i) {
      const std::uint64_t mask = std::uint64_t{1} << (k - i);
      if ((l & mask) && !(trashed & mask)) {
        trashed |= mask;
        break;
      }
    }
  }
  final_bits = k - static_cast<std::size_t>(std::popcount(trashed));
  const std::uint64_t finals = std::uint64_t{1} << final_bits;
  for (const auto& [p, h] : hist) {
    if (h.size() != finals) return false;
    for (const auto& [f, c] : h) {
      if (c * finals != sizes[p]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("share privacy oracle") {
  const auto r2 = qkdnet::share_privacy_oracle(2, 6);
  CHECK(r2.pass());
  CHECK(r2.known_sets == 2);
  CHECK(r2.views == 2 * 64);
  const auto r3 = qkdnet::share_privacy_oracle(3, 4);
  CHECK(r3.pass());
  CHECK(r3.known_sets == 3);
  CHECK(r3.views == 3 * 256);
  CHECK_THROWS_AS(qkdnet::share_privacy_oracle(3, 9), qkdnet::Error);
}

TEST_CASE("parity oracle: frozen counts") {
  const auto r = qkdnet::parity_oracle(8, 3);
  CHECK(r.pass());
  CHECK(r.differences == 255);
  CHECK(r.tuples == (std::uint64_t{1} << 24));
  CHECK(r.max_misses == (std::uint64_t{1} << 21));
  for (std::size_t k = 1; k <= 6; ++k) {
    for (std::size_t m = 1; m <= 3; ++m) CHECK(qkdnet::parity_oracle(k, m).pass());
  }
  CHECK_THROWS_AS(qkdnet::parity_oracle(11, 1), qkdnet::Error);
}

TEST_CASE("dpa_case on the documented examples") {
  // Disjoint single-bit lambdas: K* is the untouched tail, uniform.
  std::vector<BitString> units{B("1000"), B("0100")};
  const auto u = qkdnet::dpa_case(4, units);
  CHECK(u.uniform);
  CHECK(u.length_ok);
  CHECK(u.final_bits == 2);

  // lambda_2 = 0100 discloses bit 2 while 0110 trashes only bit 2, so with
  // both parities public K* = (b1, b3, b4) has b3 fixed by them.
  std::vector<BitString> overlap{B("0110"), B("0100")};
  const auto o = qkdnet::dpa_case(4, overlap);
  CHECK(o.length_ok);
  CHECK(o.final_bits == 3);
  CHECK_FALSE(o.uniform);

  // Minimal counterexample: pivots {1, 2} and K* = b3 = p1 xor p2.
  std::vector<BitString> minimal{B("110"), B("111")};
  CHECK_FALSE(qkdnet::dpa_case(3, minimal).uniform);
}

TEST_CASE("dpa_case agrees with the integer reference on every small configuration") {
  // Frozen counts of non-uniform configurations, computed by the reference.
  struct Shape {
    std::size_t k, m;
    std::size_t failing;
  };
  for (const Shape s : {Shape{3, 2, 7}, Shape{4, 3, 1077}}) {
    std::size_t failing = 0, ref_failing = 0;
    const std::uint64_t configs = std::uint64_t{1} << (s.k * s.m);
    for (std::uint64_t c = 0; c < configs; ++c) {
      std::vector<std::uint64_t> raw;
      std::vector<BitString> lambdas;
      for (std::size_t v = 0; v < s.m; ++v) {
        raw.push_back((c >> (v * s.k)) & ((std::uint64_t{1} << s.k) - 1));
        lambdas.push_back(BitString::from_uint(raw.back(), s.k));
      }
      const auto got = qkdnet::dpa_case(s.k, lambdas);
      REQUIRE(got.length_ok);
      const bool ref = reference_uniform(raw, s.k);
      REQUIRE(got.uniform == ref);
      failing += !got.uniform;
      ref_failing += !ref;
    }
    CHECK(failing == s.failing);
    CHECK(ref_failing == s.failing);
  }
}

TEST_CASE("deterministic_pa matches the integer reference") {
  qkdnet::Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t k = 1 + rng.below(16);
    const std::size_t m = rng.below(5);
    std::vector<std::uint64_t> raw;
    std::vector<BitString> lambdas;
    for (std::size_t v = 0; v < m; ++v) {
      raw.push_back(rng.next_u64() & ((std::uint64_t{1} << k) - 1));
      lambdas.push_back(BitString::from_uint(raw.back(), k));
    }
    const std::uint64_t key = rng.next_u64() & ((std::uint64_t{1} << k) - 1);
    const auto r = qkdnet::deterministic_pa(BitString::from_uint(key, k), lambdas);
    const std::uint64_t expect = reference_final(key, raw, k);
    REQUIRE((r.key.empty() ? 0 : r.key.to_uint()) == expect);
  }
}

TEST_CASE("dpa oracle reports the first failing configuration") {
  const auto r = qkdnet::dpa_oracle(6, 1, 50, 3);
  CHECK(r.pass());
  CHECK(r.configurations == 50 + qkdnet::adversarial_lambdas(6, 1).size());
  const auto r2 = qkdnet::dpa_oracle(6, 3, 50, 3);
  CHECK_FALSE(r2.pass());
  REQUIRE(r2.first_failure.has_value());
  CHECK_FALSE(r2.first_failure->uniform);
  CHECK(qkdnet::adversarial_lambdas(5, 0).size() == 1);
  CHECK_THROWS_AS(qkdnet::dpa_case(13, {}), qkdnet::Error);
}

TEST_CASE("MAC forgery and split-key oracles") {
  for (unsigned w = 1; w <= 3; ++w) {
    const auto r = qkdnet::mac_forgery_oracle(w, std::min<std::size_t>((1U << w) - 1, 5));
    CHECK(r.pass());
    CHECK(r.worst_ratio <= 1.0);
  }
  const auto s = qkdnet::split_key_oracle(2, 2);
  CHECK(s.pass());
  CHECK(s.worst_single <= 1.0);
  CHECK(s.worst_joint <= 1.0);
  CHECK_THROWS_AS(qkdnet::mac_forgery_oracle(5, 4), qkdnet::Error);
  CHECK_THROWS_AS(qkdnet::split_key_oracle(5, 1), qkdnet::Error);
}

TEST_CASE("exact_oracles report") {
  const auto report = qkdnet::exact_oracles(5, 1);
  const std::string text = report.to_text();
  CHECK(text.find("PASS share-privacy ell=2 bits=5") != std::string::npos);
  CHECK(text.find("PASS parity-miss k=5 m=3") != std::string::npos);
  CHECK(text.find("PASS mac-forgery w=4") != std::string::npos);
  CHECK(text.find("dpa k=5 m=1") != std::string::npos);
  try {
    (void)qkdnet::exact_oracles(13);
    FAIL("expected TooLarge");
  } catch (const qkdnet::Error& e) {
    CHECK(e.kind() == qkdnet::ErrorKind::kTooLarge);
  }
  CHECK_THROWS_AS(qkdnet::exact_oracles(0), qkdnet::Error);
}
