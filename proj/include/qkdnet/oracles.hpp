#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdnet/bits.hpp"

namespace qkdnet {

// Exhaustive small-instance checks of the protocol's probability claims.
// Every count below is exact; nothing is sampled except the choice of
// which lambda configurations the DPA oracle visits.

inline constexpr std::size_t kOracleMaxBits = 12;

struct SharePrivacyOracle {
  std::size_t ell = 0;
  std::size_t share_bits = 0;
  std::size_t known_sets = 0;         // subsets of ell-1 known paths
  std::uint64_t views = 0;            // (subset, known values) pairs
  std::uint64_t non_uniform_views = 0;
  bool pass() const { return known_sets > 0 && non_uniform_views == 0; }
};

/// For every set of ell-1 known shares and every value they
/// take, the key is uniform over the remaining share. ell <= 3,
/// ell * share_bits <= 24.
SharePrivacyOracle share_privacy_oracle(std::size_t ell, std::size_t share_bits);

struct ParityOracle {
  std::size_t key_bits = 0;
  std::size_t m = 0;
  std::uint64_t differences = 0;  // nonzero d tested (all of them)
  std::uint64_t tuples = 0;       // 2^(key_bits * m) lambda tuples per d
  std::uint64_t min_misses = 0;
  std::uint64_t max_misses = 0;
  /// Miss rate is exactly 2^-m for every d.
  bool pass() const {
    return differences > 0 && min_misses == max_misses &&
           (max_misses << m) == tuples;
  }
};

/// Counts, for every nonzero key difference d, the lambda tuples under
/// which all m parities agree. key_bits <= 10, m <= 3.
ParityOracle parity_oracle(std::size_t key_bits, std::size_t m);

struct DpaCase {
  std::vector<BitString> lambdas;
  std::size_t trash_bits = 0;
  std::size_t final_bits = 0;
  bool length_ok = false;   // |trash| <= m and |K*| = |K| - |trash|
  bool uniform = false;     // K* uniform given every reachable parity vector
};

/// Enumerates all 2^|K| keys for one lambda configuration. |K| <= 12.
DpaCase dpa_case(std::size_t key_bits, std::span<const BitString> lambdas);

struct DpaOracle {
  std::size_t key_bits = 0;
  std::size_t m = 0;
  std::size_t configurations = 0;
  std::size_t uniform = 0;
  std::size_t length_ok = 0;
  std::optional<DpaCase> first_failure;
  bool pass() const {
    return configurations > 0 && uniform == configurations &&
           length_ok == configurations;
  }
};

/// `random_configs` uniform configurations plus fixed adversarial ones:
/// repeated lambdas, disjoint supports, all-zero lambdas, nested supports.
DpaOracle dpa_oracle(std::size_t key_bits, std::size_t m,
                     std::size_t random_configs, std::uint64_t seed);

/// The standard adversarial lambda configurations for a given shape.
std::vector<std::vector<BitString>> adversarial_lambdas(std::size_t key_bits,
                                                         std::size_t m);

struct MacForgeryOracle {
  unsigned w = 0;
  std::size_t max_message_bits = 0;
  std::size_t messages = 0;
  // Worst success probability relative to its bound L/2^w, as
  // numerator/denominator of success * 2^w / L.
  double worst_ratio = 0.0;
  double worst_success = 0.0;
  bool impersonation_ok = false;
  bool substitution_ok = false;
  bool pass() const { return messages > 0 && impersonation_ok && substitution_ok; }
};

/// All keys, all messages up to max_message_bits bits: impersonation and
/// substitution after one observed pair. w <= 4.
MacForgeryOracle mac_forgery_oracle(unsigned w, std::size_t max_message_bits);

struct SplitKeyOracle {
  unsigned w = 0;
  std::size_t max_message_bits = 0;
  std::size_t message_pairs = 0;
  double worst_single = 0.0;  // best single forgery / p_im
  double worst_joint = 0.0;   // best two-message attack / (2 p_im)
  bool pass() const {
    return message_pairs > 0 && worst_single <= 1.0 && worst_joint <= 1.0;
  }
};

/// One 4w-bit key split into two MAC keys, two messages observed; the
/// attacker substitutes either or both. 4w <= 16.
SplitKeyOracle split_key_oracle(unsigned w, std::size_t max_message_bits);

struct OracleCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool pass() const;
  /// "PASS|FAIL <name>: <detail>" per line.
  std::string to_text() const;
};

/// Runs every oracle with key bodies up to max_bits bits (clamped per
/// oracle to its exhaustive limit). Throws TooLarge above kOracleMaxBits.
OracleReport exact_oracles(std::size_t max_bits = kOracleMaxBits,
                           std::uint64_t seed = 1);

}  // namespace qkdnet
