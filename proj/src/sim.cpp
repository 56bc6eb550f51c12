#include "qkdnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <boost/math/special_functions/beta.hpp>
#include <nlohmann/json.hpp>

#include "qkdnet/error.hpp"
#include "qkdnet/rng.hpp"

namespace qkdnet {

Interval clopper_pearson(std::size_t successes, std::size_t trials,
                         double confidence) {
  if (successes > trials) {
    throw Error(ErrorKind::kOutOfRange, "successes exceed trials");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "confidence must lie in (0, 1)");
  }
  if (trials < 2) {
    return Interval{0.0, 1.0, true};
  }
  const double alpha = 1.0 - confidence;
  const auto x = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval out;
  out.lower = successes == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2);
  out.upper = successes == trials ? 1.0
                                  : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2);
  return out;
}

double session_impersonation_bound(const SecurityParams& params) {
  return impersonation_bound(params.mac(), params.challenge_bits());
}

Bounds check_bounds(const SecurityParams& params, double p_im) {
  if (!(p_im >= 0.0 && p_im <= 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "p_im must lie in [0, 1]");
  }
  if (!(params.epsilon >= 0.0 && params.epsilon <= 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "epsilon must lie in [0, 1]");
  }
  if (params.m == 0 || params.ell == 0) {
    throw Error(ErrorKind::kParameterViolation, "m >= 1 and ell >= 1 required");
  }
  const double two_m = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(params.m, 2000)));
  const auto ell = static_cast<double>(params.ell);
  Bounds b;
  b.agreement = (1.0 - params.epsilon) * (1.0 - two_m) * std::pow(1.0 - p_im, 2.0 * ell - 2.0);
  b.privacy = two_m + 2.0 * ell * p_im + 2.0 * params.epsilon;
  return b;
}

bool bound_verdict(const Interval& interval, double lower_bound) {
  return interval.upper >= lower_bound;
}

PrivacyQuery final_key_privacy_query(const SessionOutcome& outcome,
                                     const SecurityParams& params,
                                     std::map<std::size_t, BitString> known_shares) {
  PrivacyQuery q;
  q.path_count = params.ell;
  q.share_bits = params.n;
  q.known_shares = std::move(known_shares);

  std::vector<BitString> lambdas = outcome.public_lambdas;
  std::optional<BitString> challenge;
  std::optional<BitString> response;
  for (const auto& r : outcome.transcript.records) {
    if (r.direction == Direction::kAliceToBob && !challenge) challenge = r.sent;
    if (r.direction == Direction::kBobToAlice && !response) response = r.sent;
  }
  if (challenge) {
    q.constraints.emplace_back([params, lambdas, wire = *challenge](const BitString& k) {
      return encode_challenge(k, lambdas, params).wire() == wire;
    });
  }
  // Bob's tag binds K^B; it says something about K^A only when they agree.
  if (response && outcome.keys_equal) {
    q.constraints.emplace_back([params, result = outcome.result,
                                wire = *response](const BitString& k) {
      return make_response(result, k, params) == wire;
    });
  }
  q.target = [params, lambdas](const BitString& k) {
    return deterministic_pa(split_session_key(k, params).body, lambdas).key;
  };
  return q;
}

TrialResult run_trial(const Scenario& scenario, std::size_t index,
                      std::uint64_t trial_seed) {
  TrialResult t;
  t.index = index;
  t.seed = trial_seed;
  Rng rng(trial_seed);
  Adversary adversary(scenario.adversary);
  SessionSetup setup{&scenario.graph, scenario.alice,  scenario.bob,
                     scenario.paths,  scenario.params, scenario.hop_mac,
                     scenario.pool_bits};
  try {
    const SessionOutcome out = full_session(setup, adversary, rng);
    t.result = out.result;
    t.result_prime = out.result_prime;
    t.keys_equal = out.keys_equal;
    t.final_keys_equal = out.alice_final && out.bob_final && *out.alice_final == *out.bob_final;
    if (out.alice_final) t.final_key_bits = out.alice_final->size();
    t.trash_bits = out.alice_trash.size();
    t.failures = out.failures;
    if (scenario.exact_privacy) {
      const PrivacyQuery q = final_key_privacy_query(
          out, scenario.params, adversary.view().known_alice_shares());
      const AdvantageEstimate est = guessing_advantage(q, out.alice_key, trial_seed);
      t.adversary_advantage = est.advantage;
    }
  } catch (const Error& e) {
    t.aborted = true;
    t.failures.emplace_back(to_string(e.kind()));
  }
  return t;
}

Stats aggregate(std::span<const TrialResult> trials, const Scenario& scenario,
                double confidence) {
  Stats s;
  s.trials = trials.size();
  s.confidence = confidence;
  for (const auto& t : trials) {
    if (t.agreement()) ++s.agreements;
    if (t.aborted) ++s.aborted;
    if (t.accepted_mismatch()) ++s.accepted_mismatches;
    if (t.adversary_advantage) {
      s.max_adversary_advantage =
          std::max(s.max_adversary_advantage.value_or(0.0), *t.adversary_advantage);
    }
  }
  if (s.trials > 0) {
    s.empirical = static_cast<double>(s.agreements) / static_cast<double>(s.trials);
    s.mismatch_rate =
        static_cast<double>(s.accepted_mismatches) / static_cast<double>(s.trials);
  }
  s.interval = clopper_pearson(s.agreements, s.trials, confidence);
  s.mismatch_interval = clopper_pearson(s.accepted_mismatches, s.trials, confidence);
  s.p_im = session_impersonation_bound(scenario.params);
  s.epsilon = scenario.params.epsilon;
  s.bounds = check_bounds(scenario.params, s.p_im);
  s.agreement_pass = bound_verdict(s.interval, s.bounds.agreement);
  s.soundness_pass = s.mismatch_interval.lower <= s.bounds.privacy;
  return s;
}

RunOutput run_monte_carlo(const Scenario& scenario, unsigned threads) {
  RunOutput run;
  const std::size_t n = scenario.trials;
  run.trials.resize(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

  auto work = [&](unsigned lane) {
    for (std::size_t i = lane; i < n; i += threads) {
      run.trials[i] = run_trial(scenario, i, derive_trial_seed(scenario.seed, i));
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (unsigned lane = 0; lane < threads; ++lane) {
      pool.emplace_back([&, lane] {
        try {
          work(lane);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  run.stats = aggregate(run.trials, scenario);
  return run;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson interval_json(const Interval& i) {
  return ojson{{"lower", i.lower}, {"upper", i.upper}, {"degenerate", i.degenerate}};
}

}  // namespace

std::string trial_to_json_line(const TrialResult& t) {
  ojson j;
  j["index"] = t.index;
  j["seed"] = t.seed;
  j["result"] = t.result;
  j["result_prime"] = t.result_prime;
  j["keys_equal"] = t.keys_equal;
  j["agreement"] = t.agreement();
  j["final_keys_equal"] = t.final_keys_equal;
  j["final_key_bits"] = t.final_key_bits;
  j["trash_bits"] = t.trash_bits;
  j["aborted"] = t.aborted;
  j["adversary_advantage"] =
      t.adversary_advantage ? ojson(*t.adversary_advantage) : ojson(nullptr);
  j["failures"] = t.failures;
  return j.dump();
}

std::string summary_to_json(const Stats& s, const Scenario& sc) {
  ojson paths = ojson::array();
  for (const Path& p : sc.paths.paths) paths.push_back(p);
  ojson j;
  j["scenario"] = sc.name;
  j["params"] = ojson{{"n", sc.params.n},
                      {"s", sc.params.mac_key_bits()},
                      {"m", sc.params.m},
                      {"ell", sc.params.ell},
                      {"w", sc.params.w},
                      {"epsilon", sc.params.epsilon}};
  j["seed"] = sc.seed;
  j["paths"] = paths;
  j["trials"] = s.trials;
  j["agreements"] = s.agreements;
  j["aborted"] = s.aborted;
  j["accepted_mismatches"] = s.accepted_mismatches;
  j["confidence"] = s.confidence;
  j["empirical"] = s.empirical;
  j["interval"] = interval_json(s.interval);
  j["mismatch_rate"] = s.mismatch_rate;
  j["mismatch_interval"] = interval_json(s.mismatch_interval);
  j["p_im"] = s.p_im;
  j["bounds"] = ojson{{"agreement", s.bounds.agreement}, {"privacy", s.bounds.privacy}};
  j["max_adversary_advantage"] =
      s.max_adversary_advantage ? ojson(*s.max_adversary_advantage) : ojson(nullptr);
  j["agreement_verdict"] = s.agreement_pass ? "PASS" : "FAIL";
  j["soundness_verdict"] = s.soundness_pass ? "PASS" : "FAIL";
  return j.dump(2);
}

void emit_report(const RunOutput& run, const Scenario& scenario,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  }
  auto write = [](const std::filesystem::path& file, const std::string& body) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) {
      throw Error(ErrorKind::kIoError, "cannot write " + file.string());
    }
  };
  std::string lines;
  for (const auto& t : run.trials) {
    lines += trial_to_json_line(t);
    lines += '\n';
  }
  write(dir / "trials.jsonl", lines);
  write(dir / "summary.json", summary_to_json(run.stats, scenario) + "\n");
}

}  // namespace qkdnet
