#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkdnet/adversary.hpp"
#include "qkdnet/mac.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/protocol.hpp"

namespace qkdnet {

struct Scenario {
  std::string name;
  NetworkGraph graph;
  NodeId alice;
  NodeId bob;
  SecurityParams params;  // params.epsilon derived from the chosen paths
  AdversaryConfig adversary;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  MacParams hop_mac{32};
  std::optional<std::size_t> pool_bits;
  bool exact_privacy = false;
  PathSet paths;
};

/// Parses and validates a scenario document (JSON). Throws ParseError
/// (with line or field) or ValidationError naming the violated invariant.
/// `ell` overrides params.ell when given.
Scenario parse_scenario(std::string_view text,
                        std::optional<std::size_t> ell = std::nullopt);
Scenario load_scenario(const std::filesystem::path& file,
                       std::optional<std::size_t> ell = std::nullopt);

/// Probability that at least one key epoch used by the paths leaks.
double path_epsilon(const NetworkGraph& graph, const PathSet& paths);

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool result = false;
  bool result_prime = false;
  bool keys_equal = false;
  bool final_keys_equal = false;
  std::size_t final_key_bits = 0;
  std::size_t trash_bits = 0;
  std::optional<double> adversary_advantage;
  bool aborted = false;
  std::vector<std::string> failures;

  /// result = result' = delta(K^A, K^B); an aborted (notified) run counts.
  bool agreement() const {
    return aborted || (result == result_prime && result == keys_equal);
  }
  /// Both accepted yet hold different final keys.
  bool accepted_mismatch() const {
    return !aborted && result && result_prime && !final_keys_equal;
  }
  bool operator==(const TrialResult&) const = default;
};

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  bool degenerate = false;
};

/// Exact binomial (Clopper-Pearson) interval; fewer than 2 trials gives the
/// flagged degenerate interval [0, 1].
Interval clopper_pearson(std::size_t successes, std::size_t trials,
                         double confidence = 0.99);

struct Bounds {
  double agreement = 0.0;  // (1-eps)(1-2^-m)(1-p_im)^(2l-2)
  double privacy = 0.0;    // 2^-m + 2 l p_im + 2 eps
};

Bounds check_bounds(const SecurityParams& params, double p_im);

/// p_im for a session: impersonation bound at the longest authenticated
/// message (Alice's challenge).
double session_impersonation_bound(const SecurityParams& params);

struct Stats {
  std::size_t trials = 0;
  std::size_t agreements = 0;
  std::size_t aborted = 0;
  std::size_t accepted_mismatches = 0;
  double confidence = 0.99;
  double empirical = 0.0;
  Interval interval;
  double mismatch_rate = 0.0;
  Interval mismatch_interval;
  double p_im = 0.0;
  double epsilon = 0.0;
  Bounds bounds;
  bool agreement_pass = false;
  bool soundness_pass = false;
  std::optional<double> max_adversary_advantage;

  bool pass() const { return agreement_pass && soundness_pass; }
};

/// Verdict rule: PASS iff the interval lies above the bound or contains it.
bool bound_verdict(const Interval& interval, double lower_bound);

/// Seeded, deterministic single trial. Never throws for protocol outcomes.
TrialResult run_trial(const Scenario& scenario, std::size_t index,
                      std::uint64_t trial_seed);

/// Order-independent merge of trial records into Stats.
Stats aggregate(std::span<const TrialResult> trials, const Scenario& scenario,
                double confidence = 0.99);

struct RunOutput {
  std::vector<TrialResult> trials;
  Stats stats;
};

/// Trial i uses derive_trial_seed(scenario.seed, i). threads == 0 picks the
/// hardware concurrency.
RunOutput run_monte_carlo(const Scenario& scenario, unsigned threads = 0);

/// Privacy of Alice's final key for an observer knowing `known_shares`
/// and the public transcript of `outcome` (lambdas, parities, both tags).
PrivacyQuery final_key_privacy_query(const SessionOutcome& outcome,
                                     const SecurityParams& params,
                                     std::map<std::size_t, BitString> known_shares);

std::string trial_to_json_line(const TrialResult& trial);
std::string summary_to_json(const Stats& stats, const Scenario& scenario);

/// Writes <dir>/trials.jsonl (one record per line) and <dir>/summary.json.
/// Throws IoError naming the path.
void emit_report(const RunOutput& run, const Scenario& scenario,
                 const std::filesystem::path& dir);

}  // namespace qkdnet
