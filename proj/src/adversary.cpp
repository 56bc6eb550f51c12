#include "qkdnet/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "qkdnet/error.hpp"

namespace qkdnet {

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "passive") return Strategy::kPassive;
  if (name == "tamper_shares") return Strategy::kTamperShares;
  if (name == "forge_auth") return Strategy::kForgeAuth;
  if (name == "drop_auth") return Strategy::kDropAuth;
  if (name == "disclose_all") return Strategy::kDiscloseAll;
  if (name == "substitute") return Strategy::kSubstitute;
  return std::nullopt;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kPassive: return "passive";
    case Strategy::kTamperShares: return "tamper_shares";
    case Strategy::kForgeAuth: return "forge_auth";
    case Strategy::kDropAuth: return "drop_auth";
    case Strategy::kDiscloseAll: return "disclose_all";
    case Strategy::kSubstitute: return "substitute";
  }
  return "unknown";
}

bool AdversaryConfig::has(Strategy s) const {
  return std::find(strategies.begin(), strategies.end(), s) != strategies.end();
}

AdversaryConfig corrupt(const NetworkGraph& graph, const NodeId& alice,
                        const NodeId& bob, const std::set<NodeId>& nodes,
                        std::size_t t, std::vector<Strategy> strategies) {
  if (nodes.size() > t) {
    throw Error(ErrorKind::kBoundExceeded,
                std::to_string(nodes.size()) + " corrupted nodes exceed t=" +
                    std::to_string(t));
  }
  for (const auto& n : nodes) {
    if (n == alice || n == bob) {
      throw Error(ErrorKind::kEndpointCorruption, n + " is a session endpoint");
    }
    if (!graph.has_node(n)) {
      throw Error(ErrorKind::kValidationError, "unknown corrupted node " + n);
    }
  }
  AdversaryConfig cfg;
  cfg.corrupted = nodes;
  cfg.t_bound = t;
  cfg.strategies = std::move(strategies);
  return cfg;
}

std::vector<std::size_t> controlled_paths(const AdversaryConfig& config,
                                          const PathSet& paths) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Path& p = paths[i];
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      if (config.corrupted.contains(p[k])) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

std::map<std::size_t, BitString> AdversaryView::known_alice_shares() const {
  std::map<std::size_t, BitString> out;
  for (const auto& [path, seen] : learned_shares) {
    if (!seen.empty()) {
      out.emplace(path, seen.front());
    }
  }
  return out;
}

PublishedBundle disclose(const AdversaryView& view) {
  PublishedBundle bundle;
  bundle.shares = view.known_alice_shares();
  bundle.transcripts = view.transcripts;
  return bundle;
}

Adversary::Adversary(AdversaryConfig config) : config_(std::move(config)) {}

void Adversary::begin_session(std::size_t path_count, std::size_t prefix_bits,
                              unsigned tag_bits) {
  view_ = AdversaryView{};
  view_.path_count = path_count;
  prefix_bits_ = prefix_bits;
  tag_bits_ = tag_bits;
}

void Adversary::observe_ciphertext(const NodeId& from, const NodeId& to,
                                   const BitString& ciphertext) {
  view_.ciphertexts.push_back(HopCiphertext{from, to, ciphertext});
}

void Adversary::observe_leaked_epoch(const NodeId& a, const NodeId& b,
                                     const BitString& bits) {
  view_.compromised_link_bits.push_back(LeakedEpoch{a, b, bits});
}

void Adversary::observe_share(std::size_t path, const BitString& share) {
  view_.learned_shares[path].push_back(share);
}

void Adversary::observe_classical(std::size_t path, Direction dir,
                                  const NodeId& from, const NodeId& to,
                                  const BitString& payload) {
  view_.transcripts.push_back(ObservedMessage{path, dir, from, to, payload});
}

BitString Adversary::act_on_share(std::size_t /*path*/, const BitString& share,
                                  Rng& rng) {
  if (!config_.has(Strategy::kTamperShares) || share.empty()) {
    return share;
  }
  BitString out = share;
  std::size_t first = 1;
  if (config_.tamper_region == TamperRegion::kBody && prefix_bits_ < share.size()) {
    first = prefix_bits_ + 1;
  }
  const std::size_t span = share.size() - first + 1;
  out.flip(first + static_cast<std::size_t>(rng.below(span)));
  return out;
}

std::optional<BitString> Adversary::act_on_classical(const BitString& payload,
                                                     Rng& rng) {
  if (config_.has(Strategy::kDropAuth)) {
    return std::nullopt;
  }
  if (config_.has(Strategy::kSubstitute)) {
    return config_.substitute_payload;
  }
  if (config_.has(Strategy::kForgeAuth) && !payload.empty()) {
    // Adversary-chosen message (last message bit flipped) with a random tag.
    BitString forged = payload;
    if (payload.size() > tag_bits_ && tag_bits_ > 0) {
      const std::size_t message_bits = payload.size() - tag_bits_;
      forged.flip(message_bits);
      const BitString random_tag = rng.bits(tag_bits_);
      for (unsigned j = 1; j <= tag_bits_; ++j) {
        forged.set_bit(message_bits + j, random_tag.bit(j));
      }
    } else {
      forged.flip(1 + static_cast<std::size_t>(rng.below(payload.size())));
    }
    return forged;
  }
  return payload;
}

void Adversary::end_session() {
  if (config_.has(Strategy::kDiscloseAll)) {
    view_.published = disclose(view_);
  }
}

namespace {

using Weight = std::uint64_t;
__extension__ using Wide = __int128;

// In-place Walsh-Hadamard transform; applying it twice scales by size.
void walsh_hadamard(std::vector<Wide>& a) {
  for (std::size_t len = 1; len < a.size(); len <<= 1) {
    for (std::size_t i = 0; i < a.size(); i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const Wide x = a[j];
        const Wide y = a[j + len];
        a[j] = x + y;
        a[j + len] = x - y;
      }
    }
  }
}

// Exact count of unknown-share tuples whose XOR equals each value, computed
// as repeated XOR-convolution with the all-ones vector.
std::vector<Weight> xor_of_uniform_shares(std::size_t bits, std::size_t unknown) {
  const std::size_t size = std::size_t{1} << bits;
  std::vector<Wide> dist(size, 0);
  dist[0] = 1;
  std::vector<Wide> ones(size, 1);
  walsh_hadamard(ones);
  for (std::size_t k = 0; k < unknown; ++k) {
    walsh_hadamard(dist);
    for (std::size_t i = 0; i < size; ++i) {
      dist[i] *= ones[i];
    }
    walsh_hadamard(dist);
    for (auto& v : dist) {
      v /= static_cast<Wide>(size);
    }
  }
  std::vector<Weight> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    out[i] = static_cast<Weight>(dist[i]);
  }
  return out;
}

}  // namespace

AdvantageEstimate guessing_advantage(const PrivacyQuery& query,
                                     const BitString& true_key,
                                     std::uint64_t fallback_seed) {
  const std::size_t bits = query.share_bits;
  if (query.path_count == 0) {
    throw Error(ErrorKind::kParameterViolation, "privacy query without paths");
  }
  if (true_key.size() != bits) {
    throw Error(ErrorKind::kLengthMismatch, "true key length differs from shares");
  }
  BitString base(bits);
  for (const auto& [path, share] : query.known_shares) {
    if (path >= query.path_count || share.size() != bits) {
      throw Error(ErrorKind::kParameterViolation,
                  "known share for path " + std::to_string(path) + " is invalid");
    }
    base ^= share;
  }
  const std::size_t unknown = query.path_count - query.known_shares.size();

  auto apply_target = [&](const BitString& key) {
    return query.target ? query.target(key) : key;
  };
  auto admissible = [&](const BitString& key) {
    for (const auto& c : query.constraints) {
      if (!c(key)) return false;
    }
    return true;
  };

  AdvantageEstimate est;
  est.target_bits = apply_target(true_key).size();

  const bool explicit_ok = bits <= 64 && unknown * bits <= kExplicitEnumerationBits;
  const bool convolution_ok = bits <= kConvolutionShareBits && unknown * bits <= 63;
  if (est.target_bits <= kExactTargetBits && (explicit_ok || convolution_ok)) {
    std::unordered_map<std::uint64_t, Weight> histogram;
    Weight total = 0;
    Weight true_weight = 0;
    const BitString true_target = apply_target(true_key);
    auto accumulate = [&](const BitString& key, Weight weight) {
      if (weight == 0 || !admissible(key)) return;
      const BitString t = apply_target(key);
      histogram[t.to_uint()] += weight;
      total += weight;
      if (t == true_target) true_weight += weight;
    };
    if (explicit_ok) {
      const std::uint64_t tuples = std::uint64_t{1} << (unknown * bits);
      const std::uint64_t share_mask =
          bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
      for (std::uint64_t c = 0; c < tuples; ++c) {
        std::uint64_t combined = 0;
        std::uint64_t rest = c;
        for (std::size_t k = 0; k < unknown; ++k) {
          combined ^= rest & share_mask;
          rest = bits == 64 ? 0 : rest >> bits;
        }
        accumulate(base ^ BitString::from_uint(combined, bits), 1);
      }
    } else {
      const auto weights = xor_of_uniform_shares(bits, unknown);
      for (std::uint64_t v = 0; v < weights.size(); ++v) {
        accumulate(base ^ BitString::from_uint(v, bits), weights[v]);
      }
    }
    if (total == 0) {
      throw Error(ErrorKind::kParameterViolation,
                  "constraints exclude every key consistent with the view");
    }
    Weight best = 0;
    for (const auto& [value, w] : histogram) {
      best = std::max(best, w);
    }
    est.max_posterior = static_cast<double>(best) / static_cast<double>(total);
    est.true_posterior = static_cast<double>(true_weight) / static_cast<double>(total);
    // Integer form of max/total - 2^-target_bits avoids rounding at zero.
    const long double scaled = std::ldexp(static_cast<long double>(best),
                                          static_cast<int>(est.target_bits));
    est.advantage = scaled == static_cast<long double>(total)
                        ? 0.0
                        : est.max_posterior - std::ldexp(1.0, -static_cast<int>(est.target_bits));
    est.exact = true;
    return est;
  }

  // Monte Carlo fallback: sample completions, estimate the posterior of the
  // true target value among admissible samples.
  Rng rng(fallback_seed);
  const BitString true_target = apply_target(true_key);
  std::size_t admitted = 0;
  std::size_t hits = 0;
  for (int i = 0; i < (1 << 16); ++i) {
    BitString key = base;
    for (std::size_t k = 0; k < unknown; ++k) {
      key ^= rng.bits(bits);
    }
    if (!admissible(key)) continue;
    ++admitted;
    if (apply_target(key) == true_target) ++hits;
  }
  est.exact = false;
  est.true_posterior =
      admitted == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(admitted);
  est.max_posterior = est.true_posterior;
  est.advantage = std::max(
      0.0, est.true_posterior - std::ldexp(1.0, -static_cast<int>(est.target_bits)));
  return est;
}

AdvantageEstimate guessing_advantage(const AdversaryView& view,
                                     const BitString& true_key,
                                     std::size_t key_len) {
  PrivacyQuery q;
  q.path_count = view.path_count;
  q.share_bits = key_len;
  q.known_shares = view.known_alice_shares();
  return guessing_advantage(q, true_key);
}

}  // namespace qkdnet
