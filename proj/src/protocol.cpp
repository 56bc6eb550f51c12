#include "qkdnet/protocol.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "qkdnet/error.hpp"

namespace qkdnet {

void SecurityParams::validate() const {
  mac().validate();
  if (ell < 2) {
    throw Error(ErrorKind::kParameterViolation, "ell >= 2 required");
  }
  if (n <= reserved_bits()) {
    throw Error(ErrorKind::kParameterViolation,
                "s < n required: n=" + std::to_string(n) + " must exceed the " +
                    std::to_string(reserved_bits()) + "-bit MAC key prefix");
  }
  if (m >= body_bits()) {
    throw Error(ErrorKind::kParameterViolation,
                "m < n-s required: m=" + std::to_string(m) +
                    " but the key body has " + std::to_string(body_bits()) +
                    " bits");
  }
  if (challenge_bits() > mac().max_message_bits()) {
    throw Error(ErrorKind::kParameterViolation,
                "challenge of " + std::to_string(challenge_bits()) +
                    " bits exceeds the " + std::to_string(w) +
                    "-bit MAC length block");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorKind::kParameterViolation, "epsilon outside [0,1]");
  }
}

SessionKey split_session_key(const BitString& key, const SecurityParams& params) {
  if (key.size() != params.n) {
    throw Error(ErrorKind::kLengthMismatch,
                "session key must be n=" + std::to_string(params.n) + " bits");
  }
  auto [macs, body] = split_key(key, params.reserved_bits());
  auto [first, second] = split_for_two_messages(params.mac(), macs);
  return SessionKey{std::move(first), std::move(second), std::move(body)};
}

EstablishedKeys multipath_establish(Transport& transport, const PathSet& paths,
                                    std::size_t n, Adversary& adversary, Rng& rng) {
  if (paths.size() == 0) {
    throw InsufficientConnectivity(1, 0);
  }
  EstablishedKeys keys;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    BitString share = rng.bits(n);
    keys.bob_shares.push_back(
        path_forward_key(transport, paths[i], i, share, adversary, rng));
    keys.alice_shares.push_back(std::move(share));
  }
  keys.alice_key = xor_combine(keys.alice_shares);
  keys.bob_key = xor_combine(keys.bob_shares);
  return keys;
}

Challenge encode_challenge(const BitString& alice_key,
                           std::span<const BitString> lambdas,
                           const SecurityParams& params) {
  if (lambdas.size() != params.m) {
    throw Error(ErrorKind::kParameterViolation,
                "expected m=" + std::to_string(params.m) + " parity vectors");
  }
  const SessionKey k = split_session_key(alice_key, params);
  Challenge c;
  for (const BitString& lambda : lambdas) {
    const bool parity = inner_product(lambda, k.body);
    c.message.append(lambda);
    c.message.push_back(parity);
    c.lambdas.push_back(lambda);
    c.parities.push_back(parity);
  }
  c.tag = tag(params.mac(), k.challenge_key, c.message);
  return c;
}

Challenge make_challenge(const BitString& alice_key, const SecurityParams& params,
                         Rng& rng) {
  params.validate();
  std::vector<BitString> lambdas;
  lambdas.reserve(params.m);
  for (std::size_t v = 0; v < params.m; ++v) {
    lambdas.push_back(rng.bits(params.body_bits()));
  }
  return encode_challenge(alice_key, lambdas, params);
}

namespace {

template <typename Accept>
std::optional<std::size_t> first_authentic(
    std::span<const std::optional<BitString>> received, Accept&& accept) {
  for (std::size_t i = 0; i < received.size(); ++i) {
    if (received[i] && accept(*received[i])) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> differing_copies(
    std::span<const std::optional<BitString>> received, std::size_t accepted) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < received.size(); ++i) {
    if (i != accepted && (!received[i] || *received[i] != *received[accepted])) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

ChallengeVerdict verify_challenge(
    std::span<const std::optional<BitString>> received,
    const BitString& bob_key, const SecurityParams& params) {
  const SessionKey k = split_session_key(bob_key, params);
  const MacParams mac = params.mac();
  const std::size_t message_bits = params.challenge_bits();

  ChallengeVerdict verdict;
  verdict.accepted_path = first_authentic(received, [&](const BitString& copy) {
    if (copy.size() != message_bits + mac.tag_bits()) {
      return false;
    }
    return verify(mac, k.challenge_key, copy.slice(1, message_bits),
                  Tag{copy.slice(message_bits + 1, copy.size())});
  });
  if (!verdict.accepted_path) {
    return verdict;
  }
  const BitString& copy = *received[*verdict.accepted_path];
  const std::size_t width = params.body_bits();
  bool all_match = true;
  for (std::size_t v = 0; v < params.m; ++v) {
    const std::size_t first = v * (width + 1) + 1;
    BitString lambda = copy.slice(first, first + width - 1);
    const bool parity = copy.bit(first + width);
    all_match = all_match && (inner_product(lambda, k.body) == parity);
    verdict.lambdas.push_back(std::move(lambda));
  }
  verdict.result = all_match;
  verdict.suspicious_paths = differing_copies(received, *verdict.accepted_path);
  return verdict;
}

BitString make_response(bool result, const BitString& bob_key,
                        const SecurityParams& params) {
  const SessionKey k = split_session_key(bob_key, params);
  BitString message(1);
  message.set_bit(1, result);
  return concat(message, tag(params.mac(), k.response_key, message).value);
}

ResponseVerdict verify_response(std::span<const std::optional<BitString>> received,
                                const BitString& alice_key,
                                const SecurityParams& params) {
  const SessionKey k = split_session_key(alice_key, params);
  const MacParams mac = params.mac();
  ResponseVerdict verdict;
  verdict.accepted_path = first_authentic(received, [&](const BitString& copy) {
    if (copy.size() != 1 + mac.tag_bits()) {
      return false;
    }
    return verify(mac, k.response_key, copy.slice(1, 1),
                  Tag{copy.slice(2, copy.size())});
  });
  if (verdict.accepted_path) {
    verdict.result = received[*verdict.accepted_path]->bit(1);
    verdict.suspicious_paths = differing_copies(received, *verdict.accepted_path);
  }
  return verdict;
}

DpaResult deterministic_pa(const BitString& key,
                           std::span<const BitString> lambdas) {
  std::vector<bool> trashed(key.size(), false);
  std::vector<std::size_t> trash;
  for (const BitString& lambda : lambdas) {
    if (lambda.size() != key.size()) {
      throw Error(ErrorKind::kLengthMismatch,
                  "parity vector of " + std::to_string(lambda.size()) +
                      " bits for a " + std::to_string(key.size()) + "-bit key");
    }
    for (std::size_t i = 1; i <= key.size(); ++i) {
      if (lambda.bit(i) && !trashed[i - 1]) {
        trashed[i - 1] = true;
        trash.push_back(i);
        break;
      }
    }
  }
  DpaResult out;
  for (std::size_t i = 1; i <= key.size(); ++i) {
    if (!trashed[i - 1]) {
      out.key.push_back(key.bit(i));
    }
  }
  std::sort(trash.begin(), trash.end());
  out.trash = std::move(trash);
  return out;
}

std::string transcript_to_text(const AuthTranscript& transcript) {
  std::ostringstream os;
  for (const auto& r : transcript.records) {
    os << (r.path + 1) << '\t'
       << (r.direction == Direction::kAliceToBob ? "A->B" : "B->A") << '\t'
       << r.sent.to_string() << '\t'
       << (r.received ? r.received->to_string() : std::string("-")) << '\n';
  }
  return os.str();
}

std::size_t session_link_demand(const SecurityParams& params,
                                const MacParams& hop_mac) {
  const std::size_t tag_bits = params.mac().tag_bits();
  return hop_key_cost(hop_mac, params.n, true) +
         hop_key_cost(hop_mac, params.challenge_bits() + tag_bits, false) +
         hop_key_cost(hop_mac, 1 + tag_bits, false);
}

SessionOutcome full_session(const SessionSetup& setup, Adversary& adversary,
                            Rng& rng) {
  const SecurityParams& params = setup.params;
  params.validate();
  if (setup.graph == nullptr) {
    throw Error(ErrorKind::kValidationError, "session without a graph");
  }
  if (setup.paths.size() != params.ell) {
    throw InsufficientConnectivity(params.ell, setup.paths.size());
  }
  if (auto problem = check_path_set(*setup.graph, setup.alice, setup.bob, setup.paths);
      !problem.empty()) {
    throw Error(ErrorKind::kValidationError, problem);
  }

  Transport transport(setup.hop_mac);
  const std::size_t demand = setup.pool_bits.value_or(
      session_link_demand(params, setup.hop_mac));
  for (const Path& p : setup.paths.paths) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      LinkKeyPool& pool = transport.add_link(*setup.graph->find_link(p[k], p[k + 1]));
      qkd_generate(pool, demand, rng);
    }
  }

  adversary.begin_session(params.ell, params.reserved_bits(), params.w);
  const EstablishedKeys keys =
      multipath_establish(transport, setup.paths, params.n, adversary, rng);

  SessionOutcome out;
  out.alice_key = keys.alice_key;
  out.bob_key = keys.bob_key;
  out.alice_shares = keys.alice_shares;
  out.keys_equal = keys.alice_key == keys.bob_key;

  const Challenge challenge = make_challenge(keys.alice_key, params, rng);
  out.public_lambdas = challenge.lambdas;
  const BitString challenge_wire = challenge.wire();
  std::vector<std::optional<BitString>> at_bob;
  for (std::size_t i = 0; i < setup.paths.size(); ++i) {
    at_bob.push_back(classical_send(transport, setup.paths[i], i,
                                    Direction::kAliceToBob, challenge_wire,
                                    adversary, rng));
    out.transcript.records.push_back(
        TranscriptRecord{i, Direction::kAliceToBob, challenge_wire, at_bob.back()});
  }
  const ChallengeVerdict bob = verify_challenge(at_bob, keys.bob_key, params);

  const BitString response_wire = make_response(bob.result, keys.bob_key, params);
  std::vector<std::optional<BitString>> at_alice;
  for (std::size_t i = 0; i < setup.paths.size(); ++i) {
    at_alice.push_back(classical_send(transport, setup.paths[i], i,
                                      Direction::kBobToAlice, response_wire,
                                      adversary, rng));
    out.transcript.records.push_back(
        TranscriptRecord{i, Direction::kBobToAlice, response_wire, at_alice.back()});
  }
  const ResponseVerdict alice = verify_response(at_alice, keys.alice_key, params);

  out.result = bob.result;
  out.result_prime = alice.result;
  out.transcript.result = bob.result;
  out.transcript.result_prime = alice.result;
  out.transcript.bob_accepted_path = bob.accepted_path;
  out.transcript.alice_accepted_path = alice.accepted_path;
  std::set<std::size_t> dishonest(bob.suspicious_paths.begin(),
                                  bob.suspicious_paths.end());
  dishonest.insert(alice.suspicious_paths.begin(), alice.suspicious_paths.end());
  out.transcript.dishonest_paths.assign(dishonest.begin(), dishonest.end());

  if (bob.result) {
    DpaResult r = deterministic_pa(split_session_key(keys.bob_key, params).body,
                                   bob.lambdas);
    out.bob_final = std::move(r.key);
    out.bob_trash = std::move(r.trash);
  }
  if (alice.result) {
    DpaResult r = deterministic_pa(split_session_key(keys.alice_key, params).body,
                                   challenge.lambdas);
    out.alice_final = std::move(r.key);
    out.alice_trash = std::move(r.trash);
  }
  adversary.end_session();

  if (!out.keys_equal) out.failures.emplace_back("keys_differ");
  if (!bob.accepted_path) out.failures.emplace_back("challenge_unauthenticated");
  if (bob.accepted_path && !bob.result) out.failures.emplace_back("parity_mismatch");
  if (!alice.accepted_path) out.failures.emplace_back("response_unauthenticated");
  if (!out.transcript.dishonest_paths.empty()) out.failures.emplace_back("dishonest_path");
  if (!out.agreement()) out.failures.emplace_back("disagreement");
  return out;
}

}  // namespace qkdnet
