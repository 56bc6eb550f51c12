#include "qkdnet/oracles.hpp"

#include <algorithm>
#include <sstream>

#include "qkdnet/error.hpp"
#include "qkdnet/mac.hpp"
#include "qkdnet/protocol.hpp"
#include "qkdnet/rng.hpp"

namespace qkdnet {
namespace {

[[noreturn]] void too_large(const std::string& what) {
  throw Error(ErrorKind::kTooLarge, what);
}

// Counts lambda tuples whose parities all agree, walking only agreeing
// prefixes; the last position contributes its agreeing count directly.
std::uint64_t count_agreeing(const std::vector<std::uint64_t>& agreeing_lambdas,
                             std::size_t depth) {
  const std::uint64_t a = agreeing_lambdas.size();
  if (depth == 1) return a;
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < a; ++i) {
    total += count_agreeing(agreeing_lambdas, depth - 1);
  }
  return total;
}

std::vector<BitString> all_messages(std::size_t max_bits) {
  std::vector<BitString> out;
  for (std::size_t len = 0; len <= max_bits; ++len) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
      out.push_back(len == 0 ? BitString() : BitString::from_uint(v, len));
    }
  }
  return out;
}

// tags[key * messages + j] for every key of key_bits bits.
std::vector<std::uint32_t> tag_table(const MacParams& mac,
                                     const std::vector<BitString>& messages) {
  const std::uint64_t keys = std::uint64_t{1} << mac.key_bits();
  std::vector<std::uint32_t> out(keys * messages.size());
  for (std::uint64_t k = 0; k < keys; ++k) {
    const MacKey key{BitString::from_uint(k, mac.key_bits())};
    for (std::size_t j = 0; j < messages.size(); ++j) {
      out[k * messages.size() + j] =
          static_cast<std::uint32_t>(tag(mac, key, messages[j]).value.to_uint());
    }
  }
  return out;
}

std::string fraction(std::uint64_t num, std::uint64_t den) {
  return std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace

SharePrivacyOracle share_privacy_oracle(std::size_t ell, std::size_t share_bits) {
  if (ell < 2 || ell > 3 || share_bits == 0 || ell * share_bits > 24) {
    too_large("share oracle needs 2 <= ell <= 3 and ell * bits <= 24");
  }
  SharePrivacyOracle out;
  out.ell = ell;
  out.share_bits = share_bits;
  const std::uint64_t values = std::uint64_t{1} << share_bits;
  const std::uint64_t known_values = std::uint64_t{1} << (share_bits * (ell - 1));
  std::vector<std::uint64_t> histogram(values);
  for (std::size_t hidden = 0; hidden < ell; ++hidden) {
    ++out.known_sets;
    for (std::uint64_t kv = 0; kv < known_values; ++kv) {
      std::vector<BitString> shares(ell, BitString(share_bits));
      std::size_t slot = 0;
      for (std::size_t p = 0; p < ell; ++p) {
        if (p == hidden) continue;
        shares[p] = BitString::from_uint((kv >> (slot * share_bits)) & (values - 1),
                                         share_bits);
        ++slot;
      }
      std::fill(histogram.begin(), histogram.end(), 0);
      for (std::uint64_t u = 0; u < values; ++u) {
        shares[hidden] = BitString::from_uint(u, share_bits);
        ++histogram[xor_combine(shares).to_uint()];
      }
      ++out.views;
      if (std::any_of(histogram.begin(), histogram.end(),
                      [](std::uint64_t c) { return c != 1; })) {
        ++out.non_uniform_views;
      }
    }
  }
  return out;
}

ParityOracle parity_oracle(std::size_t key_bits, std::size_t m) {
  if (key_bits == 0 || m == 0 || key_bits > 10 || m > 3) {
    too_large("parity oracle needs 1 <= key_bits <= 10 and 1 <= m <= 3");
  }
  ParityOracle out;
  out.key_bits = key_bits;
  out.m = m;
  out.tuples = std::uint64_t{1} << (key_bits * m);
  const std::uint64_t space = std::uint64_t{1} << key_bits;
  std::vector<BitString> lambdas;
  for (std::uint64_t l = 0; l < space; ++l) {
    lambdas.push_back(BitString::from_uint(l, key_bits));
  }
  bool first = true;
  for (std::uint64_t d = 1; d < space; ++d) {
    const BitString diff = BitString::from_uint(d, key_bits);
    // K_A and K_B = K_A ^ d agree on lambda iff lambda . d = 0.
    std::vector<std::uint64_t> agreeing;
    for (std::uint64_t l = 0; l < space; ++l) {
      if (!inner_product(lambdas[l], diff)) agreeing.push_back(l);
    }
    const std::uint64_t misses = count_agreeing(agreeing, m);
    out.min_misses = first ? misses : std::min(out.min_misses, misses);
    out.max_misses = first ? misses : std::max(out.max_misses, misses);
    first = false;
    ++out.differences;
  }
  return out;
}

DpaCase dpa_case(std::size_t key_bits, std::span<const BitString> lambdas) {
  if (key_bits == 0 || key_bits > kOracleMaxBits || lambdas.size() > 4) {
    too_large("DPA oracle needs 1 <= key_bits <= 12 and m <= 4");
  }
  DpaCase out;
  out.lambdas.assign(lambdas.begin(), lambdas.end());
  const std::size_t m = lambdas.size();
  const std::uint64_t keys = std::uint64_t{1} << key_bits;

  std::vector<std::uint64_t> histogram;
  std::vector<std::uint64_t> class_size(std::size_t{1} << m, 0);
  for (std::uint64_t k = 0; k < keys; ++k) {
    const BitString key = BitString::from_uint(k, key_bits);
    const DpaResult r = deterministic_pa(key, lambdas);
    if (k == 0) {
      out.trash_bits = r.trash.size();
      out.final_bits = r.key.size();
      out.length_ok = r.trash.size() <= m && r.key.size() == key_bits - r.trash.size();
      histogram.assign((std::size_t{1} << m) << out.final_bits, 0);
    }
    std::size_t parity = 0;
    for (std::size_t v = 0; v < m; ++v) {
      parity |= std::size_t{inner_product(lambdas[v], key)} << v;
    }
    ++class_size[parity];
    const std::uint64_t final_value = r.key.empty() ? 0 : r.key.to_uint();
    ++histogram[(parity << out.final_bits) + final_value];
  }
  out.uniform = true;
  const std::uint64_t finals = std::uint64_t{1} << out.final_bits;
  for (std::size_t p = 0; p < class_size.size() && out.uniform; ++p) {
    if (class_size[p] == 0) continue;
    for (std::uint64_t f = 0; f < finals; ++f) {
      if (histogram[(p << out.final_bits) + f] * finals != class_size[p]) {
        out.uniform = false;
        break;
      }
    }
  }
  return out;
}

std::vector<std::vector<BitString>> adversarial_lambdas(std::size_t key_bits,
                                                         std::size_t m) {
  std::vector<std::vector<BitString>> out;
  if (m == 0) {
    out.emplace_back();
    return out;
  }
  const BitString zero(key_bits);
  BitString ones(key_bits);
  for (std::size_t i = 1; i <= key_bits; ++i) ones.set_bit(i, true);
  BitString alternating(key_bits);
  for (std::size_t i = 1; i <= key_bits; i += 2) alternating.set_bit(i, true);

  out.emplace_back(m, zero);
  out.emplace_back(m, ones);
  out.emplace_back(m, alternating);

  // Disjoint supports: contiguous blocks.
  std::vector<BitString> disjoint;
  const std::size_t width = std::max<std::size_t>(1, key_bits / m);
  for (std::size_t v = 0; v < m; ++v) {
    BitString l(key_bits);
    for (std::size_t i = v * width + 1; i <= std::min(key_bits, (v + 1) * width); ++i) {
      l.set_bit(i, true);
    }
    disjoint.push_back(std::move(l));
  }
  out.push_back(disjoint);

  // Single-bit lambdas, repeated first bit, then a zero lambda in the mix.
  std::vector<BitString> units;
  for (std::size_t v = 0; v < m; ++v) {
    BitString l(key_bits);
    l.set_bit(std::min(key_bits, v + 1), true);
    units.push_back(std::move(l));
  }
  out.push_back(units);
  std::vector<BitString> with_zero = units;
  with_zero.back() = zero;
  out.push_back(with_zero);

  // Nested prefixes: 1, 11, 111, ...
  std::vector<BitString> nested;
  for (std::size_t v = 0; v < m; ++v) {
    BitString l(key_bits);
    for (std::size_t i = 1; i <= std::min(key_bits, v + 1); ++i) l.set_bit(i, true);
    nested.push_back(std::move(l));
  }
  out.push_back(nested);
  return out;
}

DpaOracle dpa_oracle(std::size_t key_bits, std::size_t m,
                     std::size_t random_configs, std::uint64_t seed) {
  DpaOracle out;
  out.key_bits = key_bits;
  out.m = m;
  auto record = [&](const std::vector<BitString>& lambdas) {
    DpaCase c = dpa_case(key_bits, lambdas);
    ++out.configurations;
    if (c.uniform) ++out.uniform;
    if (c.length_ok) ++out.length_ok;
    if ((!c.uniform || !c.length_ok) && !out.first_failure) {
      out.first_failure = std::move(c);
    }
  };
  Rng rng(seed);
  for (std::size_t r = 0; r < random_configs; ++r) {
    std::vector<BitString> lambdas;
    for (std::size_t v = 0; v < m; ++v) lambdas.push_back(rng.bits(key_bits));
    record(lambdas);
  }
  for (const auto& lambdas : adversarial_lambdas(key_bits, m)) {
    record(lambdas);
  }
  return out;
}

MacForgeryOracle mac_forgery_oracle(unsigned w, std::size_t max_message_bits) {
  const MacParams mac{w};
  if (w == 0 || w > 4 || max_message_bits > mac.max_message_bits() ||
      max_message_bits > 8) {
    too_large("MAC oracle needs 1 <= w <= 4 and messages shorter than 2^w bits (<= 8)");
  }
  MacForgeryOracle out;
  out.w = w;
  out.max_message_bits = max_message_bits;
  const std::vector<BitString> messages = all_messages(max_message_bits);
  out.messages = messages.size();
  const std::size_t n = messages.size();
  const std::uint64_t keys = std::uint64_t{1} << mac.key_bits();
  const std::uint64_t tags = std::uint64_t{1} << w;
  const std::vector<std::uint32_t> table = tag_table(mac, messages);
  std::vector<std::size_t> blocks(n);
  for (std::size_t j = 0; j < n; ++j) blocks[j] = block_count(mac, messages[j].size());

  auto note = [&](std::uint64_t hits, std::uint64_t pool, std::size_t l) {
    const double success = static_cast<double>(hits) / static_cast<double>(pool);
    out.worst_success = std::max(out.worst_success, success);
    out.worst_ratio = std::max(
        out.worst_ratio, success * static_cast<double>(tags) / static_cast<double>(l));
    return hits * tags <= l * pool;
  };

  out.impersonation_ok = true;
  std::vector<std::uint64_t> count(tags);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(count.begin(), count.end(), 0);
    for (std::uint64_t k = 0; k < keys; ++k) ++count[table[k * n + j]];
    const std::uint64_t best = *std::max_element(count.begin(), count.end());
    out.impersonation_ok &= note(best, keys, blocks[j]);
  }

  out.substitution_ok = true;
  std::vector<std::vector<std::uint64_t>> by_tag(tags);
  for (std::size_t j = 0; j < n; ++j) {
    for (auto& v : by_tag) v.clear();
    for (std::uint64_t k = 0; k < keys; ++k) by_tag[table[k * n + j]].push_back(k);
    for (std::uint64_t t = 0; t < tags; ++t) {
      const auto& consistent = by_tag[t];
      if (consistent.empty()) continue;
      for (std::size_t j2 = 0; j2 < n; ++j2) {
        if (j2 == j) continue;
        std::fill(count.begin(), count.end(), 0);
        for (std::uint64_t k : consistent) ++count[table[k * n + j2]];
        const std::uint64_t best = *std::max_element(count.begin(), count.end());
        out.substitution_ok &=
            note(best, consistent.size(), std::max(blocks[j], blocks[j2]));
      }
    }
  }
  return out;
}

SplitKeyOracle split_key_oracle(unsigned w, std::size_t max_message_bits) {
  const MacParams mac{w};
  if (w == 0 || 4 * std::size_t{w} > 16 || max_message_bits > mac.max_message_bits()) {
    too_large("split-key oracle needs 4w <= 16 and messages shorter than 2^w bits");
  }
  SplitKeyOracle out;
  out.w = w;
  out.max_message_bits = max_message_bits;
  const std::vector<BitString> messages = all_messages(max_message_bits);
  const std::size_t n = messages.size();
  const std::vector<std::uint32_t> table = tag_table(mac, messages);
  const std::uint64_t tags = std::uint64_t{1} << w;
  const std::uint64_t joint_keys = std::uint64_t{1} << (4 * w);

  std::vector<std::uint64_t> first(joint_keys);
  std::vector<std::uint64_t> second(joint_keys);
  for (std::uint64_t k = 0; k < joint_keys; ++k) {
    const auto [k1, k2] =
        split_for_two_messages(mac, BitString::from_uint(k, 4 * std::size_t{w}));
    first[k] = k1.material.to_uint();
    second[k] = k2.material.to_uint();
  }
  std::size_t longest = 0;
  for (const auto& msg : messages) longest = std::max(longest, block_count(mac, msg.size()));
  const double p_im = static_cast<double>(longest) / static_cast<double>(tags);

  std::vector<std::vector<std::uint64_t>> classes(tags * tags);
  std::vector<std::uint64_t> count(tags);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      ++out.message_pairs;
      for (auto& c : classes) c.clear();
      for (std::uint64_t k = 0; k < joint_keys; ++k) {
        classes[table[first[k] * n + a] * tags + table[second[k] * n + b]].push_back(k);
      }
      for (const auto& keys : classes) {
        if (keys.empty()) continue;
        const double size = static_cast<double>(keys.size());
        // Best replacement of each message, then both attempts together.
        auto best_for = [&](std::size_t observed, const std::vector<std::uint64_t>& half)
            -> std::pair<double, std::pair<std::size_t, std::uint64_t>> {
          double best = 0.0;
          std::pair<std::size_t, std::uint64_t> arg{observed, 0};
          for (std::size_t j = 0; j < n; ++j) {
            if (j == observed) continue;
            std::fill(count.begin(), count.end(), 0);
            for (std::uint64_t k : keys) ++count[table[half[k] * n + j]];
            const auto it = std::max_element(count.begin(), count.end());
            const double s = static_cast<double>(*it) / size;
            if (s > best) {
              best = s;
              arg = {j, static_cast<std::uint64_t>(it - count.begin())};
            }
          }
          return {best, arg};
        };
        const auto [s1, f1] = best_for(a, first);
        const auto [s2, f2] = best_for(b, second);
        std::uint64_t joint = 0;
        for (std::uint64_t k : keys) {
          const bool hit1 = f1.first != a && table[first[k] * n + f1.first] == f1.second;
          const bool hit2 = f2.first != b && table[second[k] * n + f2.first] == f2.second;
          if (hit1 || hit2) ++joint;
        }
        out.worst_single = std::max(out.worst_single, std::max(s1, s2) / p_im);
        out.worst_joint =
            std::max(out.worst_joint, static_cast<double>(joint) / size / (2.0 * p_im));
      }
    }
  }
  return out;
}

bool OracleReport::pass() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

std::string OracleReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  return os.str();
}

OracleReport exact_oracles(std::size_t max_bits, std::uint64_t seed) {
  if (max_bits == 0 || max_bits > kOracleMaxBits) {
    too_large("exhaustive oracles support 1.." + std::to_string(kOracleMaxBits) +
              " key bits, got " + std::to_string(max_bits));
  }
  OracleReport report;

  for (std::size_t ell = 2; ell <= 3; ++ell) {
    const std::size_t bits = std::min<std::size_t>(max_bits, ell == 2 ? 8 : 6);
    const SharePrivacyOracle r = share_privacy_oracle(ell, bits);
    report.checks.push_back(
        {"share-privacy ell=" + std::to_string(ell) + " bits=" + std::to_string(bits),
         r.pass(),
         std::to_string(r.views) + " views, " + std::to_string(r.non_uniform_views) +
             " non-uniform"});
  }

  const std::size_t parity_bits = std::min<std::size_t>(max_bits, 8);
  for (std::size_t m = 1; m <= 3; ++m) {
    const ParityOracle r = parity_oracle(parity_bits, m);
    report.checks.push_back(
        {"parity-miss k=" + std::to_string(parity_bits) + " m=" + std::to_string(m),
         r.pass(),
         "misses " + fraction(r.max_misses, r.tuples) + " for all " +
             std::to_string(r.differences) + " differences, expected 1/" +
             std::to_string(std::uint64_t{1} << m)});
  }

  for (std::size_t m = 1; m <= 4; ++m) {
    const DpaOracle r = dpa_oracle(max_bits, m, 100, seed + m);
    std::string detail = std::to_string(r.uniform) + "/" +
                         std::to_string(r.configurations) + " uniform, " +
                         std::to_string(r.length_ok) + " length-consistent";
    if (r.first_failure) {
      detail += "; first failure lambdas";
      for (const auto& l : r.first_failure->lambdas) detail += " " + l.to_string();
    }
    report.checks.push_back(
        {"dpa k=" + std::to_string(max_bits) + " m=" + std::to_string(m), r.pass(),
         detail});
  }

  for (unsigned w = 1; w <= std::min<std::size_t>(max_bits, 4); ++w) {
    const std::size_t len = std::min<std::size_t>(MacParams{w}.max_message_bits(), 6);
    const MacForgeryOracle r = mac_forgery_oracle(w, len);
    std::ostringstream d;
    d << r.messages << " messages, worst success " << r.worst_success
      << ", worst success/(L/2^w) " << r.worst_ratio;
    report.checks.push_back({"mac-forgery w=" + std::to_string(w), r.pass(), d.str()});
  }

  for (unsigned w = 1; w <= std::min<std::size_t>(max_bits, 3); ++w) {
    const std::size_t len = std::min<std::size_t>(MacParams{w}.max_message_bits(), 2);
    const SplitKeyOracle r = split_key_oracle(w, len);
    std::ostringstream d;
    d << r.message_pairs << " message pairs, single/p_im " << r.worst_single
      << ", joint/(2 p_im) " << r.worst_joint;
    report.checks.push_back({"split-key w=" + std::to_string(w), r.pass(), d.str()});
  }
  return report;
}

}  // namespace qkdnet
