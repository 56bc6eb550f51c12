#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qkdnet/adversary.hpp"
#include "qkdnet/bits.hpp"
#include "qkdnet/mac.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/rng.hpp"

namespace qkdnet {

struct KeyEpoch {
  std::size_t begin = 0;  // 0-based offsets into the pool buffer
  std::size_t end = 0;
  bool compromised = false;
};

// Key shared by the two ends of one QKD link. Each endpoint reads through
// its own cursor; both must consume identical bits in identical order and no
// bit is ever handed out twice.
class LinkKeyPool {
 public:
  explicit LinkKeyPool(QkdLink link);

  const QkdLink& link() const noexcept { return link_; }
  void set_alive(bool alive) noexcept { link_.alive = alive; }

  /// Appends one epoch of nbits uniform bits; the epoch leaks with
  /// probability link().epsilon. Throws LinkDown on an aborted link.
  void generate(std::size_t nbits, Rng& rng);

  std::size_t size() const noexcept { return buffer_.size(); }
  std::size_t offset(const NodeId& endpoint) const;
  std::size_t available(const NodeId& endpoint) const;

  /// Next nbits at this endpoint's cursor. Throws InsufficientKey.
  BitString take(const NodeId& endpoint, std::size_t nbits);

  /// True if any bit in [begin, end) belongs to a compromised epoch.
  bool leaked(std::size_t begin, std::size_t end) const;
  const std::vector<KeyEpoch>& epochs() const noexcept { return epochs_; }

 private:
  std::size_t side(const NodeId& endpoint) const;

  QkdLink link_;
  BitString buffer_;
  std::array<std::size_t, 2> cursor_{0, 0};
  std::vector<KeyEpoch> epochs_;
};

/// qkd_generate: see LinkKeyPool::generate.
void qkd_generate(LinkKeyPool& pool, std::size_t nbits, Rng& rng);

struct HopMessage {
  NodeId sender;
  NodeId receiver;
  BitString payload;  // ciphertext when encrypted
  Tag tag;
  bool encrypted = false;
  std::size_t key_offset = 0;
};

/// Key bits consumed by one hop: one-time pad (if encrypting) plus a MAC key.
std::size_t hop_key_cost(const MacParams& hop_mac, std::size_t payload_bits,
                         bool encrypt);

/// Sender side: one-time-pad (optional) then authenticate with fresh pool bits.
HopMessage hop_seal(LinkKeyPool& pool, const NodeId& sender,
                    const BitString& plaintext, bool encrypt,
                    const MacParams& hop_mac);

/// Receiver side: consume the matching bits, verify, decrypt. Throws
/// AuthFailure on a bad tag.
BitString hop_open(LinkKeyPool& pool, const HopMessage& message,
                   const MacParams& hop_mac);

/// hop_seal followed by hop_open at the other endpoint.
BitString hop_send(LinkKeyPool& pool, const NodeId& sender,
                   const BitString& payload, bool encrypt,
                   const MacParams& hop_mac);

/// The pools of a set of links plus the hop-level MAC parameters.
class Transport {
 public:
  explicit Transport(MacParams hop_mac = MacParams{32});

  const MacParams& hop_mac() const noexcept { return hop_mac_; }

  LinkKeyPool& add_link(const QkdLink& link);
  LinkKeyPool& pool(const NodeId& a, const NodeId& b);
  bool has_pool(const NodeId& a, const NodeId& b) const;

 private:
  static std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b);

  MacParams hop_mac_;
  std::map<std::pair<NodeId, NodeId>, LinkKeyPool> pools_;
};

/// Relays a key share node to node under OTP + hop MACs. Every intermediate
/// node sees the share in plaintext; corrupted nodes report it to the
/// adversary and may replace it. Leaked link epochs expose the hop
/// plaintext. Returns the value Bob receives.
BitString path_forward_key(Transport& transport, const Path& path,
                           std::size_t path_index, const BitString& share,
                           Adversary& adversary, Rng& rng);

/// Authenticated (unencrypted) relay of a classical message along `path`
/// in `direction`. Honest paths always deliver M unchanged; a corrupted node
/// may substitute it or drop it (nullopt).
std::optional<BitString> classical_send(Transport& transport, const Path& path,
                                        std::size_t path_index,
                                        Direction direction,
                                        const BitString& message,
                                        Adversary& adversary, Rng& rng);

}  // namespace qkdnet
