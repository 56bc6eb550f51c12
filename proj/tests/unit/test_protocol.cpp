#include <doctest.h>

#include <bit>
#include <sstream>

#include "qkdnet/error.hpp"
#include "qkdnet/protocol.hpp"

using qkdnet::Adversary;
using qkdnet::BitString;
using qkdnet::ErrorKind;
using qkdnet::NetworkGraph;
using qkdnet::Rng;
using qkdnet::SecurityParams;
using qkdnet::SessionSetup;
using qkdnet::Strategy;

namespace {

BitString B(const char* s) { return BitString::from_string(s); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const qkdnet::Error& e) {
    return e.kind();
  }
  FAIL("expected qkdnet::Error");
  return ErrorKind::kIoError;
}

SecurityParams params(std::size_t n, unsigned w, std::size_t m, std::size_t ell) {
  SecurityParams p;
  p.n = n;
  p.w = w;
  p.m = m;
  p.ell = ell;
  return p;
}

NetworkGraph three_chains() {
  NetworkGraph g;
  for (const char* n : {"A", "P1", "P2", "Q1", "Q2", "R1", "R2", "B"}) g.add_node(n);
  for (auto [a, b] : {std::pair{"A", "P1"}, {"P1", "P2"}, {"P2", "B"}, {"A", "Q1"},
                      {"Q1", "Q2"}, {"Q2", "B"}, {"A", "R1"}, {"R1", "R2"}, {"R2", "B"}}) {
    g.add_link({a, b, 10.0, 0.0, true});
  }
  return g;
}

SessionSetup setup_for(const NetworkGraph& g, std::size_t ell, SecurityParams p) {
  SessionSetup s;
  s.graph = &g;
  s.alice = "A";
  s.bob = "B";
  s.paths = qkdnet::vertex_disjoint_paths(g, "A", "B", ell);
  p.ell = ell;
  s.params = p;
  return s;
}

Adversary adversary(std::set<std::string> nodes, std::vector<Strategy> s) {
  qkdnet::AdversaryConfig c;
  c.t_bound = nodes.size();
  c.corrupted = std::move(nodes);
  c.strategies = std::move(s);
  return Adversary(c);
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(params(64, 8, 4, 2).validate());
  CHECK(params(64, 8, 4, 2).body_bits() == 32);
  CHECK(params(64, 8, 4, 2).challenge_bits() == 4 * 33);
  auto msg = [](SecurityParams p) {
    try {
      p.validate();
    } catch (const qkdnet::Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(params(40, 8, 8, 2)).find("m < n-s required") != std::string::npos);
  CHECK(msg(params(32, 8, 1, 2)).find("s < n required") != std::string::npos);
  CHECK(msg(params(64, 8, 4, 1)).find("ell >= 2") != std::string::npos);
  // 4 * 33 = 132 challenge bits cannot be length-encoded in a 7-bit block.
  CHECK(msg(params(60, 7, 4, 2)).find("length block") != std::string::npos);
}

TEST_CASE("session key layout") {
  const auto p = params(20, 2, 2, 2);
  const BitString k = B("11110000101010101100");
  const auto sk = qkdnet::split_session_key(k, p);
  CHECK(sk.challenge_key.material.to_string() == "1111");
  CHECK(sk.response_key.material.to_string() == "0000");
  CHECK(sk.body.to_string() == "101010101100");
  CHECK(kind_of([&] { (void)qkdnet::split_session_key(B("1"), p); }) ==
        ErrorKind::kLengthMismatch);
}

TEST_CASE("challenge encoding") {
  // n - s = 4 with m = 2: 10 message bits.
  const auto p = params(20, 4, 2, 2);
  const BitString key = qkdnet::concat(BitString(16), B("1010"));
  const std::vector<BitString> lambdas{B("1100"), B("0110")};
  const auto c = qkdnet::encode_challenge(key, lambdas, p);
  CHECK(c.message.size() == 10);
  CHECK(c.message.to_string() == "1100101101");
  CHECK(c.parities == std::vector<bool>{true, true});
  CHECK(c.wire().size() == 14);

  const BitString zero(20);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    for (bool parity : qkdnet::make_challenge(zero, p, rng).parities) CHECK_FALSE(parity);
  }
  CHECK(kind_of([&] { (void)qkdnet::make_challenge(key, params(20, 4, 4, 2), rng); }) ==
        ErrorKind::kParameterViolation);
}

TEST_CASE("verify_challenge outcomes") {
  const auto p = params(48, 8, 4, 3);
  Rng rng(2);
  const BitString ka = rng.bits(48);
  const auto c = qkdnet::make_challenge(ka, p, rng);
  const std::optional<BitString> good = c.wire();

  std::vector<std::optional<BitString>> all{good, good, good};
  auto v = qkdnet::verify_challenge(all, ka, p);
  CHECK(v.result);
  CHECK(v.accepted_path == 0u);
  CHECK(v.lambdas == c.lambdas);
  CHECK(v.suspicious_paths.empty());

  BitString forged = c.wire();
  forged.flip(3);
  std::vector<std::optional<BitString>> mixed{forged, std::nullopt, good};
  v = qkdnet::verify_challenge(mixed, ka, p);
  CHECK(v.result);
  CHECK(v.accepted_path == 2u);
  CHECK(v.suspicious_paths == std::vector<std::size_t>{0, 1});

  // Prefix differs: no copy authenticates.
  BitString kb = ka;
  kb.flip(1);
  v = qkdnet::verify_challenge(all, kb, p);
  CHECK_FALSE(v.result);
  CHECK_FALSE(v.accepted_path.has_value());

  std::vector<std::optional<BitString>> none{std::nullopt, BitString(3), std::nullopt};
  CHECK_FALSE(qkdnet::verify_challenge(none, ka, p).accepted_path.has_value());
}

TEST_CASE("parity test misses exactly 2^-m of lambda tuples (exhaustive)") {
  // Keys agree on the MAC prefix and differ by d in the body. The reference
  // count uses integer popcount; the protocol count runs encode/verify.
  for (std::size_t m = 1; m <= 3; ++m) {
    const auto p = params(20, 4, m, 2);
    const std::size_t k = 4;
    const BitString prefix = BitString::from_uint(0xbeef, 16);
    for (std::uint64_t body = 0; body < 16; body += 5) {
      const BitString ka = qkdnet::concat(prefix, BitString::from_uint(body, k));
      for (std::uint64_t d = 1; d < 16; ++d) {
        const BitString kb = qkdnet::concat(prefix, BitString::from_uint(body ^ d, k));
        std::uint64_t misses = 0, ref_misses = 0;
        const std::uint64_t tuples = std::uint64_t{1} << (k * m);
        for (std::uint64_t t = 0; t < tuples; ++t) {
          std::vector<BitString> lambdas;
          bool ref_agree = true;
          for (std::size_t v = 0; v < m; ++v) {
            const std::uint64_t l = (t >> (v * k)) & 15;
            lambdas.push_back(BitString::from_uint(l, k));
            ref_agree = ref_agree && std::popcount(l & d) % 2 == 0;
          }
          const std::vector<std::optional<BitString>> got{
              qkdnet::encode_challenge(ka, lambdas, p).wire()};
          misses += qkdnet::verify_challenge(got, kb, p).result;
          ref_misses += ref_agree;
        }
        REQUIRE(misses == ref_misses);
        REQUIRE((misses << m) == tuples);
      }
    }
  }
}

TEST_CASE("response round trip") {
  const auto p = params(48, 8, 4, 2);
  Rng rng(3);
  const BitString k = rng.bits(48);
  for (bool r : {true, false}) {
    const BitString wire = qkdnet::make_response(r, k, p);
    CHECK(wire.size() == 9);
    CHECK(wire.bit(1) == r);
    std::vector<std::optional<BitString>> copies{wire, wire};
    const auto v = qkdnet::verify_response(copies, k, p);
    CHECK(v.accepted_path == 0u);
    CHECK(v.result == r);
  }
  BitString other = k;
  other.flip(20);
  std::vector<std::optional<BitString>> copies{qkdnet::make_response(true, other, p)};
  CHECK_FALSE(qkdnet::verify_response(copies, k, p).accepted_path.has_value());

  BitString forged = qkdnet::make_response(false, k, p);
  forged.flip(1);
  std::vector<std::optional<BitString>> two{forged, qkdnet::make_response(true, k, p)};
  const auto v = qkdnet::verify_response(two, k, p);
  CHECK(v.accepted_path == 1u);
  CHECK(v.result);
  CHECK(v.suspicious_paths == std::vector<std::size_t>{0});
}

TEST_CASE("deterministic privacy amplification") {
  std::vector<BitString> l1{B("1000"), B("0100")};
  auto r = qkdnet::deterministic_pa(B("1010"), l1);
  CHECK(r.trash == std::vector<std::size_t>{1, 2});
  CHECK(r.key.to_string() == "10");

  std::vector<BitString> l2{B("0110"), B("0100")};
  r = qkdnet::deterministic_pa(B("1010"), l2);
  CHECK(r.trash == std::vector<std::size_t>{2});
  CHECK(r.key.to_string() == "110");

  r = qkdnet::deterministic_pa(B("1010"), {});
  CHECK(r.trash.empty());
  CHECK(r.key.to_string() == "1010");

  std::vector<BitString> bad{B("101")};
  CHECK(kind_of([&] { (void)qkdnet::deterministic_pa(B("1010"), bad); }) ==
        ErrorKind::kLengthMismatch);
}

TEST_CASE("trash size and final length on random inputs") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 1 + rng.below(40);
    const std::size_t m = rng.below(8);
    std::vector<BitString> lambdas;
    for (std::size_t v = 0; v < m; ++v) lambdas.push_back(rng.bits(k));
    const auto r = qkdnet::deterministic_pa(rng.bits(k), lambdas);
    REQUIRE(r.trash.size() <= m);
    REQUIRE(r.key.size() == k - r.trash.size());
    REQUIRE(std::is_sorted(r.trash.begin(), r.trash.end()));
  }
}

TEST_CASE("multipath establishment XORs path shares") {
  const auto g = three_chains();
  Rng rng(5);
  qkdnet::Transport t;
  for (const auto& l : g.links()) t.add_link(l).generate(4000, rng);
  const auto paths = qkdnet::vertex_disjoint_paths(g, "A", "B", 3);
  Adversary honest;
  honest.begin_session(3, 0, 8);
  const auto keys = qkdnet::multipath_establish(t, paths, 64, honest, rng);
  CHECK(keys.alice_key == keys.bob_key);
  CHECK(keys.alice_key == qkdnet::xor_combine(keys.alice_shares));

  Adversary tamper = adversary({"P1"}, {Strategy::kTamperShares});
  tamper.begin_session(3, 0, 8);
  const auto bad = qkdnet::multipath_establish(t, paths, 64, tamper, rng);
  CHECK_FALSE(bad.alice_key == bad.bob_key);
}

TEST_CASE("honest full session") {
  const auto g = three_chains();
  for (std::size_t ell : {2U, 3U}) {
    const auto s = setup_for(g, ell, params(64, 8, 4, ell));
    Rng rng(6);
    Adversary none;
    const auto out = qkdnet::full_session(s, none, rng);
    CHECK(out.keys_equal);
    CHECK(out.result);
    CHECK(out.result_prime);
    REQUIRE(out.alice_final.has_value());
    REQUIRE(out.bob_final.has_value());
    CHECK(*out.alice_final == *out.bob_final);
    CHECK(out.alice_final->size() == 32 - out.alice_trash.size());
    CHECK(out.failures.empty());
    CHECK(out.transcript.records.size() == 2 * ell);
  }
}

TEST_CASE("tampered share is caught") {
  const auto g = three_chains();
  const auto s = setup_for(g, 3, params(64, 8, 4, 3));
  int caught = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    Adversary adv = adversary({"Q1"}, {Strategy::kTamperShares});
    const auto out = qkdnet::full_session(s, adv, rng);
    REQUIRE_FALSE(out.keys_equal);
    CHECK(out.agreement() == !out.result);
    caught += !out.result && !out.result_prime;
  }
  CHECK(caught >= 170);
}

TEST_CASE("dropping on ell-1 paths still completes") {
  const auto g = three_chains();
  const auto s = setup_for(g, 3, params(64, 8, 4, 3));
  Rng rng(7);
  Adversary adv = adversary({"P1", "Q1"}, {Strategy::kDropAuth});
  const auto out = qkdnet::full_session(s, adv, rng);
  CHECK(out.result);
  CHECK(out.result_prime);
  CHECK(out.transcript.bob_accepted_path == 2u);
  CHECK(out.transcript.dishonest_paths == std::vector<std::size_t>{0, 1});
}

TEST_CASE("forged copies are identified") {
  const auto g = three_chains();
  const auto s = setup_for(g, 2, params(64, 8, 4, 2));
  Rng rng(8);
  Adversary adv = adversary({"P1"}, {Strategy::kForgeAuth});
  const auto out = qkdnet::full_session(s, adv, rng);
  CHECK(out.result);
  CHECK(out.result_prime);
  CHECK(out.transcript.dishonest_paths == std::vector<std::size_t>{0});
  const std::string text = qkdnet::transcript_to_text(out.transcript);
  CHECK(text.find("1\tA->B\t") == 0);
  CHECK(text.find("2\tB->A\t") != std::string::npos);
}

TEST_CASE("session setup errors") {
  const auto g = three_chains();
  auto s = setup_for(g, 2, params(64, 8, 4, 2));
  Rng rng(9);
  Adversary none;
  s.pool_bits = 10;
  CHECK(kind_of([&] { (void)qkdnet::full_session(s, none, rng); }) ==
        ErrorKind::kInsufficientKey);
  s.pool_bits.reset();
  s.params.ell = 3;
  CHECK(kind_of([&] { (void)qkdnet::full_session(s, none, rng); }) ==
        ErrorKind::kInsufficientConnectivity);
  s.params.ell = 2;
  s.pool_bits = qkdnet::session_link_demand(s.params, s.hop_mac);
  CHECK(qkdnet::full_session(s, none, rng).result);
}
