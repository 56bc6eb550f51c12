#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qkdnet/error.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/oracles.hpp"
#include "qkdnet/protocol.hpp"
#include "qkdnet/sim.hpp"

namespace {

std::string join_path(const qkdnet::Path& p) {
  std::string out;
  for (const auto& n : p) {
    if (!out.empty()) out += '-';
    out += n;
  }
  return out;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

int cmd_run(const std::string& file, std::optional<std::size_t> trials,
            std::optional<std::uint64_t> seed, const std::string& out,
            unsigned threads) {
  qkdnet::Scenario sc = qkdnet::load_scenario(file);
  if (trials) sc.trials = *trials;
  if (seed) sc.seed = *seed;
  if (sc.trials == 0) {
    throw qkdnet::Error(qkdnet::ErrorKind::kOutOfRange, "trials must be at least 1");
  }
  const qkdnet::RunOutput run = qkdnet::run_monte_carlo(sc, threads);
  qkdnet::emit_report(run, sc, out);
  const qkdnet::Stats& s = run.stats;
  std::printf("scenario %s: %zu trials, %zu agreements, %zu aborted\n",
              sc.name.c_str(), s.trials, s.agreements, s.aborted);
  std::printf("agreement %.6f  99%% interval [%.6f, %.6f]%s  bound %.6f  %s\n",
              s.empirical, s.interval.lower, s.interval.upper,
              s.interval.degenerate ? " (degenerate)" : "", s.bounds.agreement,
              verdict(s.agreement_pass));
  std::printf("accepted mismatch %.6f  99%% interval [%.6f, %.6f]  bound %.6f  %s\n",
              s.mismatch_rate, s.mismatch_interval.lower, s.mismatch_interval.upper,
              s.bounds.privacy, verdict(s.soundness_pass));
  if (s.max_adversary_advantage) {
    std::printf("max adversary advantage %.6g\n", *s.max_adversary_advantage);
  }
  return s.pass() ? 0 : 1;
}

int cmd_bounds(std::size_t n, std::optional<std::size_t> s, std::size_t m,
               std::size_t ell, unsigned w, double eps) {
  qkdnet::SecurityParams p;
  p.n = n;
  p.m = m;
  p.ell = ell;
  p.w = w;
  p.epsilon = eps;
  if (s && *s != p.mac_key_bits()) {
    throw qkdnet::Error(qkdnet::ErrorKind::kParameterViolation,
                        "s = 2w required (s=" + std::to_string(*s) +
                            ", w=" + std::to_string(w) + ")");
  }
  p.validate();
  const double p_im = qkdnet::session_impersonation_bound(p);
  const qkdnet::Bounds b = qkdnet::check_bounds(p, p_im);
  std::printf("challenge_bits %zu\n", p.challenge_bits());
  std::printf("blocks %zu\n", qkdnet::block_count(p.mac(), p.challenge_bits()));
  std::printf("p_im %.9g\n", p_im);
  std::printf("agreement_bound %.9g\n", b.agreement);
  std::printf("privacy_bound %.9g\n", b.privacy);
  return 0;
}

int cmd_paths(const std::string& file, std::size_t ell) {
  const qkdnet::Scenario sc = qkdnet::load_scenario(file, ell);
  for (const auto& p : sc.paths.paths) {
    std::printf("%s\n", join_path(p).c_str());
  }
  return 0;
}

int cmd_plan(std::size_t t, std::size_t u, const std::string& mode_name) {
  const auto mode = qkdnet::parse_transmission_mode(mode_name);
  if (!mode) {
    throw qkdnet::Error(qkdnet::ErrorKind::kParseError, "unknown mode " + mode_name);
  }
  std::printf("%zu\n", qkdnet::required_paths(t, u, *mode));
  return 0;
}

int cmd_oracle(std::size_t max_bits, std::uint64_t seed) {
  const qkdnet::OracleReport report = qkdnet::exact_oracles(max_bits, seed);
  std::cout << report.to_text();
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipath QKD network key agreement simulator"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "Monte Carlo run of a scenario");
  run->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  run->add_option("--trials", trials, "Override the trial count");
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Report directory")->required();
  run->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::size_t n = 0, m = 0, ell = 0;
  std::optional<std::size_t> s;
  unsigned w = 0;
  double eps = 0.0;
  auto* bounds = app.add_subcommand("bounds", "Agreement and privacy bounds");
  bounds->add_option("--n", n, "Raw key bits")->required();
  bounds->add_option("--s", s, "MAC key bits per message (must equal 2w)");
  bounds->add_option("--m", m, "Parity checks")->required();
  bounds->add_option("--ell", ell, "Disjoint paths")->required();
  bounds->add_option("--w", w, "MAC word bits")->required();
  bounds->add_option("--eps", eps, "Key privacy failure probability")
      ->check(CLI::Range(0.0, 1.0));

  std::size_t path_count = 0;
  auto* paths = app.add_subcommand("paths", "Vertex-disjoint paths of a scenario");
  paths->add_option("--scenario", scenario_file, "Scenario JSON file")->required();
  paths->add_option("--ell", path_count, "Number of paths")->required();

  std::size_t t = 0, u = 0;
  std::string mode;
  auto* plan = app.add_subcommand("plan", "Disjoint paths needed against t corruptions");
  plan->add_option("--t", t, "Corrupted nodes")->required();
  plan->add_option("--u", u, "Disjoint feedback paths");
  plan->add_option("--mode", mode, "one_way, two_way or feedback")->required();

  std::size_t max_bits = qkdnet::kOracleMaxBits;
  std::uint64_t oracle_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive small-instance checks");
  oracle->add_option("--max-bits", max_bits, "Largest key body enumerated")->required();
  oracle->add_option("--seed", oracle_seed, "Seed for random lambda configurations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_file, trials, seed, out_dir, threads);
    if (*bounds) return cmd_bounds(n, s, m, ell, w, eps);
    if (*paths) return cmd_paths(scenario_file, path_count);
    if (*plan) return cmd_plan(t, u, mode);
    if (*oracle) return cmd_oracle(max_bits, oracle_seed);
  } catch (const qkdnet::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
