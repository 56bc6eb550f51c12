#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdnet/adversary.hpp"
#include "qkdnet/bits.hpp"
#include "qkdnet/mac.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/rng.hpp"
#include "qkdnet/transport.hpp"

namespace qkdnet {

// Public parameters of one key-authentication session.
//
// A raw key K of n bits is laid out as
//   K = kappa' (2w bits) || kappa'' (2w bits) || body (n - 4w bits)
// kappa' authenticates Alice's challenge, kappa'' Bob's response; the parity
// tests and the final key come from the body. s = 2w is the MAC key size per
// message.
struct SecurityParams {
  std::size_t n = 64;
  unsigned w = 8;
  std::size_t m = 4;
  std::size_t ell = 2;
  double epsilon = 0.0;

  std::size_t mac_key_bits() const noexcept { return 2 * std::size_t{w}; }
  std::size_t reserved_bits() const noexcept { return 2 * mac_key_bits(); }
  std::size_t body_bits() const noexcept {
    return n > reserved_bits() ? n - reserved_bits() : 0;
  }
  std::size_t challenge_bits() const noexcept { return m * (body_bits() + 1); }
  MacParams mac() const noexcept { return MacParams{w}; }

  /// Throws ParameterViolation naming the violated constraint.
  void validate() const;
};

struct SessionKey {
  MacKey challenge_key;  // kappa'
  MacKey response_key;   // kappa''
  BitString body;
};

SessionKey split_session_key(const BitString& key, const SecurityParams& params);

struct EstablishedKeys {
  BitString alice_key;
  BitString bob_key;
  std::vector<BitString> alice_shares;
  std::vector<BitString> bob_shares;
};

/// Sends a fresh n-bit share along each path and XORs what each side holds.
EstablishedKeys multipath_establish(Transport& transport, const PathSet& paths,
                                    std::size_t n, Adversary& adversary, Rng& rng);

struct Challenge {
  BitString message;  // lambda_1 || parity_1 || ... || lambda_m || parity_m
  Tag tag;
  std::vector<BitString> lambdas;
  std::vector<bool> parities;

  /// message || tag, as sent over each path.
  BitString wire() const { return concat(message, tag.value); }
};

/// Deterministic core of make_challenge for given lambdas.
Challenge encode_challenge(const BitString& alice_key,
                           std::span<const BitString> lambdas,
                           const SecurityParams& params);

/// Draws lambda_1..lambda_m uniformly (in that order) and encodes.
Challenge make_challenge(const BitString& alice_key, const SecurityParams& params,
                         Rng& rng);

struct ChallengeVerdict {
  bool result = false;
  std::optional<std::size_t> accepted_path;  // 0-based
  std::vector<BitString> lambdas;            // from the accepted copy
  std::vector<std::size_t> suspicious_paths; // copies differing from it
};

/// Bob's step: first copy (ascending path index) whose tag verifies under
/// kappa'_B is accepted; result = 1 iff all its parities match K_B.
/// Missing (nullopt) or malformed copies count as MAC failures.
ChallengeVerdict verify_challenge(
    std::span<const std::optional<BitString>> received,
    const BitString& bob_key, const SecurityParams& params);

/// (result || T') with T' under kappa''_B.
BitString make_response(bool result, const BitString& bob_key,
                        const SecurityParams& params);

struct ResponseVerdict {
  bool result = false;
  std::optional<std::size_t> accepted_path;
  std::vector<std::size_t> suspicious_paths;
};

ResponseVerdict verify_response(std::span<const std::optional<BitString>> received,
                                const BitString& alice_key,
                                const SecurityParams& params);

struct DpaResult {
  BitString key;
  std::vector<std::size_t> trash;  // 1-based positions, ascending
};

/// Deterministic privacy amplification: for each lambda in order, trash the
/// smallest set position not yet trashed (if any); delete trashed positions.
DpaResult deterministic_pa(const BitString& key,
                           std::span<const BitString> lambdas);

struct TranscriptRecord {
  std::size_t path = 0;  // 0-based
  Direction direction = Direction::kAliceToBob;
  BitString sent;
  std::optional<BitString> received;
};

struct AuthTranscript {
  std::vector<TranscriptRecord> records;
  bool result = false;        // Bob
  bool result_prime = false;  // Alice
  std::optional<std::size_t> bob_accepted_path;
  std::optional<std::size_t> alice_accepted_path;
  std::vector<std::size_t> dishonest_paths;
};

/// One line per message: "<path>\t<A->B|B->A>\t<sent>\t<received or ->".
/// Paths are printed 1-based.
std::string transcript_to_text(const AuthTranscript& transcript);

struct SessionOutcome {
  BitString alice_key;  // K^A
  BitString bob_key;    // K^B
  std::vector<BitString> alice_shares;
  bool keys_equal = false;
  bool result = false;
  bool result_prime = false;
  std::optional<BitString> alice_final;
  std::optional<BitString> bob_final;
  std::vector<std::size_t> alice_trash;
  std::vector<std::size_t> bob_trash;
  std::vector<BitString> public_lambdas;  // Alice's challenge vectors
  AuthTranscript transcript;
  std::vector<std::string> failures;

  bool agreement() const { return result == result_prime && result == keys_equal; }
};

struct SessionSetup {
  const NetworkGraph* graph = nullptr;
  NodeId alice;
  NodeId bob;
  PathSet paths;
  SecurityParams params;
  MacParams hop_mac{32};
  /// Bits generated per link before the session; default covers exactly
  /// the session's traffic.
  std::optional<std::size_t> pool_bits;
};

/// Key bits one link must hold to carry a whole session.
std::size_t session_link_demand(const SecurityParams& params,
                                const MacParams& hop_mac);

/// Establishment, challenge, response and privacy amplification. Protocol
/// failures are reported in the outcome; only setup errors throw.
SessionOutcome full_session(const SessionSetup& setup, Adversary& adversary,
                            Rng& rng);

}  // namespace qkdnet
