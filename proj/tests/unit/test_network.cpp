#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "qkdnet/error.hpp"
#include "qkdnet/network.hpp"
#include "qkdnet/rng.hpp"

using qkdnet::NetworkGraph;
using qkdnet::Path;
using qkdnet::TransmissionMode;

namespace {

NetworkGraph graph_of(const std::vector<std::string>& nodes,
                      const std::vector<std::pair<std::string, std::string>>& edges) {
  NetworkGraph g;
  for (const auto& n : nodes) g.add_node(n);
  for (const auto& [a, b] : edges) g.add_link({a, b, 10.0, 0.0, true});
  return g;
}

NetworkGraph two_chains() {
  return graph_of({"A", "S1", "S2", "T1", "T2", "B"},
                  {{"A", "S1"}, {"S1", "S2"}, {"S2", "B"},
                   {"A", "T1"}, {"T1", "T2"}, {"T2", "B"}});
}

NetworkGraph k4() {
  return graph_of({"A", "B", "C", "D"}, {{"A", "B"}, {"A", "C"}, {"A", "D"},
                                         {"B", "C"}, {"B", "D"}, {"C", "D"}});
}

// Reference: enumerate all simple a-b paths, then the largest family of
// pairwise internally disjoint ones by exhaustive search.
std::size_t brute_force_disjoint(const NetworkGraph& g, const std::string& a,
                                 const std::string& b) {
  std::vector<std::set<std::string>> interiors;
  bool direct = false;
  std::vector<std::string> stack{a};
  std::set<std::string> on{a};
  std::function<void()> dfs = [&] {
    const std::string cur = stack.back();
    for (const auto& n : g.neighbors(cur)) {
      if (on.contains(n)) continue;
      if (n == b) {
        if (stack.size() == 1) {
          direct = true;
        } else {
          interiors.emplace_back(stack.begin() + 1, stack.end());
        }
        continue;
      }
      stack.push_back(n);
      on.insert(n);
      dfs();
      on.erase(n);
      stack.pop_back();
    }
  };
  dfs();
  std::size_t best = 0;
  std::function<void(std::size_t, std::set<std::string>&, std::size_t)> pick =
      [&](std::size_t i, std::set<std::string>& used, std::size_t count) {
        best = std::max(best, count);
        for (std::size_t j = i; j < interiors.size(); ++j) {
          const auto& s = interiors[j];
          if (std::any_of(s.begin(), s.end(), [&](const auto& v) { return used.contains(v); }))
            continue;
          for (const auto& v : s) used.insert(v);
          pick(j + 1, used, count + 1);
          for (const auto& v : s) used.erase(v);
        }
      };
  std::set<std::string> used;
  pick(0, used, 0);
  return best + (direct ? 1 : 0);
}

std::string show(const Path& p) {
  std::string s;
  for (const auto& n : p) s += (s.empty() ? "" : "-") + n;
  return s;
}

}  // namespace

TEST_CASE("graph construction and validation") {
  NetworkGraph g;
  g.add_node("A");
  g.add_node("B");
  CHECK_THROWS_AS(g.add_node("A"), qkdnet::Error);
  CHECK_THROWS_AS(g.add_link({"A", "A", 1, 0, true}), qkdnet::Error);
  CHECK_THROWS_AS(g.add_link({"A", "X", 1, 0, true}), qkdnet::Error);
  CHECK_THROWS_AS(g.add_link({"A", "B", -1, 0, true}), qkdnet::Error);
  CHECK_THROWS_AS(g.add_link({"A", "B", 1, 1.5, true}), qkdnet::Error);
  g.add_link({"A", "B", 1, 0, true});
  CHECK_THROWS_AS(g.add_link({"B", "A", 1, 0, true}), qkdnet::Error);
  CHECK(g.find_link("B", "A") != nullptr);
  CHECK(g.connected());
  g.add_node("C");
  CHECK_FALSE(g.connected());
}

TEST_CASE("two disjoint chains") {
  const auto ps = qkdnet::vertex_disjoint_paths(two_chains(), "A", "B", 2);
  REQUIRE(ps.size() == 2);
  CHECK(show(ps[0]) == "A-S1-S2-B");
  CHECK(show(ps[1]) == "A-T1-T2-B");
  CHECK(qkdnet::check_path_set(two_chains(), "A", "B", ps).empty());
}

TEST_CASE("chain has a single cut vertex") {
  const auto g = graph_of({"A", "N", "B"}, {{"A", "N"}, {"N", "B"}});
  try {
    (void)qkdnet::vertex_disjoint_paths(g, "A", "B", 2);
    FAIL("expected InsufficientConnectivity");
  } catch (const qkdnet::InsufficientConnectivity& e) {
    CHECK(e.requested() == 2);
    CHECK(e.achievable() == 1);
    CHECK(e.kind() == qkdnet::ErrorKind::kInsufficientConnectivity);
  }
}

TEST_CASE("complete graph on four nodes") {
  const auto ps = qkdnet::vertex_disjoint_paths(k4(), "A", "B", 3);
  REQUIRE(ps.size() == 3);
  CHECK(show(ps[0]) == "A-B");
  CHECK(show(ps[1]) == "A-C-B");
  CHECK(show(ps[2]) == "A-D-B");
  CHECK(qkdnet::max_disjoint_paths(k4(), "A", "B") == 3);
  CHECK(brute_force_disjoint(k4(), "A", "B") == 3);
}

TEST_CASE("dead links are not used") {
  auto g = k4();
  g.set_alive("A", "B", false);
  CHECK(qkdnet::max_disjoint_paths(g, "A", "B") == 2);
  const auto ps = qkdnet::vertex_disjoint_paths(g, "A", "B", 2);
  CHECK(show(ps[0]) == "A-C-B");
  CHECK(show(ps[1]) == "A-D-B");
}

TEST_CASE("max-flow agrees with brute force on random small graphs") {
  qkdnet::Rng rng(77);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 3 + rng.below(6);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
    NetworkGraph g;
    for (const auto& s : names) g.add_node(s);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.bernoulli(0.45)) g.add_link({names[i], names[j], 1, 0, true});
      }
    }
    const std::string a = names[0], b = names[n - 1];
    const std::size_t expect = brute_force_disjoint(g, a, b);
    REQUIRE(qkdnet::max_disjoint_paths(g, a, b) == expect);
    if (expect > 0) {
      const auto ps = qkdnet::vertex_disjoint_paths(g, a, b, expect);
      REQUIRE(ps.size() == expect);
      REQUIRE(qkdnet::check_path_set(g, a, b, ps).empty());
      REQUIRE(qkdnet::vertex_disjoint_paths(g, a, b, expect).paths == ps.paths);
    }
    CHECK_THROWS_AS(qkdnet::vertex_disjoint_paths(g, a, b, expect + 1),
                    qkdnet::InsufficientConnectivity);
  }
}

TEST_CASE("check_path_set reports violations") {
  const auto g = k4();
  qkdnet::PathSet overlap{{{"A", "C", "B"}, {"A", "C", "D", "B"}}};
  CHECK_FALSE(qkdnet::check_path_set(g, "A", "B", overlap).empty());
  qkdnet::PathSet wrong_end{{{"A", "C"}}};
  CHECK_FALSE(qkdnet::check_path_set(g, "A", "B", wrong_end).empty());
  qkdnet::PathSet repeat{{{"A", "C", "D", "C", "B"}}};
  CHECK_FALSE(qkdnet::check_path_set(g, "A", "B", repeat).empty());
}

TEST_CASE("required_paths") {
  CHECK(qkdnet::required_paths(3, 0, TransmissionMode::kOneWay) == 10);
  CHECK(qkdnet::required_paths(3, 0, TransmissionMode::kTwoWay) == 7);
  CHECK(qkdnet::required_paths(2, 2, TransmissionMode::kFeedbackDisjoint) == 5);
  for (auto mode : {TransmissionMode::kOneWay, TransmissionMode::kTwoWay,
                    TransmissionMode::kFeedbackDisjoint}) {
    CHECK(qkdnet::required_paths(0, 0, mode) == 1);
    CHECK(qkdnet::required_paths(0, 5, mode) == 1);
  }
  for (std::size_t t = 0; t <= 20; ++t) {
    CHECK(qkdnet::required_paths(t, 0, TransmissionMode::kFeedbackDisjoint) ==
          qkdnet::required_paths(t, 0, TransmissionMode::kOneWay));
    std::size_t prev = SIZE_MAX;
    for (std::size_t u = 0; u <= 30; ++u) {
      const std::size_t r = qkdnet::required_paths(t, u, TransmissionMode::kFeedbackDisjoint);
      CHECK(r <= prev);
      CHECK(r >= 2 * t + 1);
      prev = r;
    }
  }
  CHECK(qkdnet::parse_transmission_mode("feedback") == TransmissionMode::kFeedbackDisjoint);
  CHECK(qkdnet::parse_transmission_mode("one_way") == TransmissionMode::kOneWay);
  CHECK_FALSE(qkdnet::parse_transmission_mode("sideways").has_value());
}

TEST_CASE("link rate model") {
  const qkdnet::RateModel m;
  CHECK(qkdnet::link_rate(0.0) == m.r0_bps);
  CHECK(qkdnet::link_rate(100.0) == 0.0);
  CHECK(qkdnet::link_rate(250.0) == 0.0);
  CHECK(qkdnet::link_rate(40.0) == doctest::Approx(100e3 * std::pow(10.0, -1.0)));
  CHECK(qkdnet::link_rate(75.0) ==
        doctest::Approx(100e3 * std::pow(10.0, -0.25 * 75 / 10) * std::exp(-1.0)));
  double prev = qkdnet::link_rate(0.0);
  for (double d = 0.0; d <= 120.0; d += 0.25) {
    const double r = qkdnet::link_rate(d);
    CHECK(r <= prev);
    CHECK(r >= 0.0);
    prev = r;
  }
  CHECK_THROWS_AS(qkdnet::link_rate(-1.0), qkdnet::Error);
}
