#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qkdnet/bits.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/rng.hpp"

namespace qkdnet {

enum class Strategy {
  kPassive,
  kTamperShares,
  kForgeAuth,
  kDropAuth,
  kDiscloseAll,
  kSubstitute,
};

std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view to_string(Strategy s);

/// Where tamper_shares flips a bit: anywhere in the share, or only in the
/// key body past the MAC-key prefix (undetectable by the MAC).
enum class TamperRegion { kBody, kAny };

enum class Direction { kAliceToBob, kBobToAlice };

struct AdversaryConfig {
  std::set<NodeId> corrupted;
  std::size_t t_bound = 0;
  std::vector<Strategy> strategies{Strategy::kPassive};
  TamperRegion tamper_region = TamperRegion::kBody;
  BitString substitute_payload;  // used by kSubstitute

  bool has(Strategy s) const;
};

/// Validated configuration. Throws BoundExceeded when |nodes| > t,
/// EndpointCorruption when an endpoint is listed and ValidationError for
/// nodes outside the graph.
AdversaryConfig corrupt(const NetworkGraph& graph, const NodeId& alice,
                        const NodeId& bob, const std::set<NodeId>& nodes,
                        std::size_t t,
                        std::vector<Strategy> strategies = {Strategy::kPassive});

/// 0-based indices of the paths with at least one corrupted internal node.
std::vector<std::size_t> controlled_paths(const AdversaryConfig& config,
                                          const PathSet& paths);

struct ObservedMessage {
  std::size_t path = 0;
  Direction direction = Direction::kAliceToBob;
  NodeId from;
  NodeId to;
  BitString payload;
};

struct HopCiphertext {
  NodeId from;
  NodeId to;
  BitString ciphertext;
};

struct LeakedEpoch {
  NodeId a;
  NodeId b;
  BitString bits;
};

struct PublishedBundle {
  std::map<std::size_t, BitString> shares;  // path index -> Alice's share
  std::vector<ObservedMessage> transcripts;

  bool empty() const { return shares.empty() && transcripts.empty(); }
};

struct AdversaryView {
  std::size_t path_count = 0;
  // Plaintext share values in the order they were seen along each path; the
  // first entry is what Alice sent, later ones may be tampered values.
  std::map<std::size_t, std::vector<BitString>> learned_shares;
  std::vector<ObservedMessage> transcripts;
  std::vector<HopCiphertext> ciphertexts;
  std::vector<LeakedEpoch> compromised_link_bits;
  std::optional<PublishedBundle> published;

  std::map<std::size_t, BitString> known_alice_shares() const;
};

/// Copies what the adversary learned into a bundle visible to everyone.
PublishedBundle disclose(const AdversaryView& view);

// Scripted Byzantine adversary. Transport calls the hooks below as traffic
// passes; only the first corrupted node on a path acts on it, later
// corrupted nodes relay.
class Adversary {
 public:
  Adversary() = default;
  explicit Adversary(AdversaryConfig config);

  const AdversaryConfig& config() const noexcept { return config_; }
  const AdversaryView& view() const noexcept { return view_; }
  AdversaryView& view() noexcept { return view_; }

  bool controls(const NodeId& node) const {
    return config_.corrupted.contains(node);
  }

  /// Resets the view for a new session. prefix_bits is the MAC-key prefix
  /// of each share and tag_bits the end-to-end tag width.
  void begin_session(std::size_t path_count, std::size_t prefix_bits,
                     unsigned tag_bits);

  void observe_ciphertext(const NodeId& from, const NodeId& to,
                          const BitString& ciphertext);
  void observe_leaked_epoch(const NodeId& a, const NodeId& b,
                            const BitString& bits);
  void observe_share(std::size_t path, const BitString& share);
  void observe_classical(std::size_t path, Direction dir, const NodeId& from,
                         const NodeId& to, const BitString& payload);

  /// Share as relayed onward by a corrupted node.
  BitString act_on_share(std::size_t path, const BitString& share, Rng& rng);

  /// Classical payload as relayed onward; nullopt when dropped.
  std::optional<BitString> act_on_classical(const BitString& payload, Rng& rng);

  /// Applies end-of-session behavior (disclose_all publishes the view).
  void end_session();

 private:
  AdversaryConfig config_;
  AdversaryView view_;
  std::size_t prefix_bits_ = 0;
  unsigned tag_bits_ = 0;
};

// Exact privacy measurement. The observer knows some of Alice's path shares
// (key = XOR of all shares, unknown shares uniform) plus arbitrary public
// constraints on the key; `target` maps the key to the quantity whose
// secrecy is measured (identity by default).
struct PrivacyQuery {
  std::size_t path_count = 0;
  std::size_t share_bits = 0;
  std::map<std::size_t, BitString> known_shares;
  std::vector<std::function<bool(const BitString&)>> constraints;
  std::function<BitString(const BitString&)> target;
};

struct AdvantageEstimate {
  double advantage = 0.0;      // max posterior - 2^-target_bits
  double max_posterior = 0.0;
  double true_posterior = 0.0;
  std::size_t target_bits = 0;
  bool exact = true;           // false: Monte Carlo fallback
};

inline constexpr std::size_t kExplicitEnumerationBits = 20;
inline constexpr std::size_t kConvolutionShareBits = 20;
inline constexpr std::size_t kExactTargetBits = 20;

AdvantageEstimate guessing_advantage(const PrivacyQuery& query,
                                     const BitString& true_key,
                                     std::uint64_t fallback_seed = 0);

/// The view's own knowledge (first observed value per path) about a key of
/// key_len bits.
AdvantageEstimate guessing_advantage(const AdversaryView& view,
                                     const BitString& true_key,
                                     std::size_t key_len);

}  // namespace qkdnet
