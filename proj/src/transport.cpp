#include "qkdnet/transport.hpp"

#include "qkdnet/error.hpp"

namespace qkdnet {

LinkKeyPool::LinkKeyPool(QkdLink link) : link_(std::move(link)) {}

void LinkKeyPool::generate(std::size_t nbits, Rng& rng) {
  if (!link_.alive) {
    throw Error(ErrorKind::kLinkDown, link_.a + "-" + link_.b);
  }
  const std::size_t begin = buffer_.size();
  buffer_.append(rng.bits(nbits));
  epochs_.push_back(KeyEpoch{begin, buffer_.size(), rng.bernoulli(link_.epsilon)});
}

std::size_t LinkKeyPool::side(const NodeId& endpoint) const {
  if (endpoint == link_.a) return 0;
  if (endpoint == link_.b) return 1;
  throw Error(ErrorKind::kValidationError,
              endpoint + " is not an endpoint of " + link_.a + "-" + link_.b);
}

std::size_t LinkKeyPool::offset(const NodeId& endpoint) const {
  return cursor_[side(endpoint)];
}

std::size_t LinkKeyPool::available(const NodeId& endpoint) const {
  return buffer_.size() - cursor_[side(endpoint)];
}

BitString LinkKeyPool::take(const NodeId& endpoint, std::size_t nbits) {
  std::size_t& cur = cursor_[side(endpoint)];
  if (buffer_.size() - cur < nbits) {
    throw Error(ErrorKind::kInsufficientKey,
                link_.a + "-" + link_.b + " has " +
                    std::to_string(buffer_.size() - cur) + " bits, needs " +
                    std::to_string(nbits));
  }
  BitString out = nbits == 0 ? BitString() : buffer_.slice(cur + 1, cur + nbits);
  cur += nbits;
  return out;
}

bool LinkKeyPool::leaked(std::size_t begin, std::size_t end) const {
  for (const auto& e : epochs_) {
    if (e.compromised && e.begin < end && begin < e.end) {
      return true;
    }
  }
  return false;
}

void qkd_generate(LinkKeyPool& pool, std::size_t nbits, Rng& rng) {
  pool.generate(nbits, rng);
}

std::size_t hop_key_cost(const MacParams& hop_mac, std::size_t payload_bits,
                         bool encrypt) {
  return (encrypt ? payload_bits : 0) + hop_mac.key_bits();
}

HopMessage hop_seal(LinkKeyPool& pool, const NodeId& sender,
                    const BitString& plaintext, bool encrypt,
                    const MacParams& hop_mac) {
  const QkdLink& l = pool.link();
  HopMessage msg;
  msg.sender = sender;
  msg.receiver = sender == l.a ? l.b : l.a;
  msg.encrypted = encrypt;
  msg.key_offset = pool.offset(sender);
  if (pool.available(sender) < hop_key_cost(hop_mac, plaintext.size(), encrypt)) {
    throw Error(ErrorKind::kInsufficientKey,
                l.a + "-" + l.b + " cannot cover a " +
                    std::to_string(plaintext.size()) + "-bit hop");
  }
  msg.payload = encrypt ? plaintext ^ pool.take(sender, plaintext.size()) : plaintext;
  const MacKey key{pool.take(sender, hop_mac.key_bits())};
  msg.tag = tag(hop_mac, key, msg.payload);
  return msg;
}

BitString hop_open(LinkKeyPool& pool, const HopMessage& message,
                   const MacParams& hop_mac) {
  const NodeId& me = message.receiver;
  if (pool.offset(me) != message.key_offset) {
    throw Error(ErrorKind::kAuthFailure, "key cursor out of step at " + me);
  }
  const std::size_t n = message.payload.size();
  BitString pad = message.encrypted ? pool.take(me, n) : BitString(n);
  const MacKey key{pool.take(me, hop_mac.key_bits())};
  if (!verify(hop_mac, key, message.payload, message.tag)) {
    throw Error(ErrorKind::kAuthFailure,
                "hop " + message.sender + "->" + me + " failed verification");
  }
  return message.payload ^ pad;
}

BitString hop_send(LinkKeyPool& pool, const NodeId& sender,
                   const BitString& payload, bool encrypt,
                   const MacParams& hop_mac) {
  return hop_open(pool, hop_seal(pool, sender, payload, encrypt, hop_mac), hop_mac);
}

Transport::Transport(MacParams hop_mac) : hop_mac_(hop_mac) { hop_mac_.validate(); }

std::pair<NodeId, NodeId> Transport::key(const NodeId& a, const NodeId& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

LinkKeyPool& Transport::add_link(const QkdLink& link) {
  auto [it, inserted] = pools_.try_emplace(key(link.a, link.b), link);
  if (!inserted) {
    throw Error(ErrorKind::kValidationError,
                "duplicate pool for " + link.a + "-" + link.b);
  }
  return it->second;
}

LinkKeyPool& Transport::pool(const NodeId& a, const NodeId& b) {
  auto it = pools_.find(key(a, b));
  if (it == pools_.end()) {
    throw Error(ErrorKind::kValidationError, "no pool for " + a + "-" + b);
  }
  return it->second;
}

bool Transport::has_pool(const NodeId& a, const NodeId& b) const {
  return pools_.contains(key(a, b));
}

BitString path_forward_key(Transport& transport, const Path& path,
                           std::size_t path_index, const BitString& share,
                           Adversary& adversary, Rng& rng) {
  if (path.size() < 2) {
    throw Error(ErrorKind::kValidationError, "path needs two endpoints");
  }
  BitString value = share;
  bool acted = false;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const NodeId& from = path[k];
    const NodeId& to = path[k + 1];
    LinkKeyPool& pool = transport.pool(from, to);
    if (!pool.link().alive) {
      throw Error(ErrorKind::kLinkDown, from + "-" + to);
    }
    const HopMessage msg = hop_seal(pool, from, value, true, transport.hop_mac());
    adversary.observe_ciphertext(from, to, msg.payload);
    if (pool.leaked(msg.key_offset, msg.key_offset + value.size())) {
      adversary.observe_leaked_epoch(from, to, msg.payload ^ value);
      adversary.observe_share(path_index, value);
    }
    value = hop_open(pool, msg, transport.hop_mac());
    const bool last = k + 2 == path.size();
    if (!last && adversary.controls(to)) {
      adversary.observe_share(path_index, value);
      if (!acted) {
        value = adversary.act_on_share(path_index, value, rng);
        acted = true;
      }
    }
  }
  return value;
}

std::optional<BitString> classical_send(Transport& transport, const Path& path,
                                        std::size_t path_index,
                                        Direction direction,
                                        const BitString& message,
                                        Adversary& adversary, Rng& rng) {
  if (path.size() < 2) {
    throw Error(ErrorKind::kValidationError, "path needs two endpoints");
  }
  const std::size_t hops = path.size() - 1;
  auto node_at = [&](std::size_t k) -> const NodeId& {
    return direction == Direction::kAliceToBob ? path[k] : path[hops - k];
  };
  BitString value = message;
  bool acted = false;
  for (std::size_t k = 0; k < hops; ++k) {
    const NodeId& from = node_at(k);
    const NodeId& to = node_at(k + 1);
    LinkKeyPool& pool = transport.pool(from, to);
    // Honest hops always deliver eventually; modeled as same-trial delivery.
    value = hop_send(pool, from, value, false, transport.hop_mac());
    adversary.observe_classical(path_index, direction, from, to, value);
    if (k + 1 < hops && adversary.controls(to) && !acted) {
      acted = true;
      auto relayed = adversary.act_on_classical(value, rng);
      if (!relayed) {
        return std::nullopt;
      }
      value = std::move(*relayed);
    }
  }
  return value;
}

}  // namespace qkdnet
