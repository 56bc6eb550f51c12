#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qkdnet {

using NodeId = std::string;

struct QkdLink {
  NodeId a;
  NodeId b;
  double distance_km = 0.0;
  double epsilon = 0.0;  // per-epoch probability that generated key leaks
  bool alive = true;     // false once the endpoints aborted key generation
};

/// Undirected graph of trusted nodes joined by QKD links. At most one link
/// per node pair.
class NetworkGraph {
 public:
  void add_node(const NodeId& id);
  void add_link(QkdLink link);
  void set_alive(const NodeId& a, const NodeId& b, bool alive);

  bool has_node(const NodeId& id) const { return index_.contains(id); }
  /// Nodes in insertion order.
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  const std::vector<QkdLink>& links() const noexcept { return links_; }
  const QkdLink* find_link(const NodeId& a, const NodeId& b) const;

  /// Neighbors over alive links, lexicographically sorted.
  std::vector<NodeId> neighbors(const NodeId& id) const;

  /// Connectivity over all links, alive or not.
  bool connected() const;

 private:
  std::vector<NodeId> nodes_;
  std::map<NodeId, std::size_t> index_;
  std::vector<QkdLink> links_;
};

using Path = std::vector<NodeId>;

struct PathSet {
  std::vector<Path> paths;

  std::size_t size() const noexcept { return paths.size(); }
  const Path& operator[](std::size_t i) const { return paths[i]; }
};

/// Largest number of internally vertex-disjoint a-b paths over alive links.
std::size_t max_disjoint_paths(const NetworkGraph& graph, const NodeId& a,
                               const NodeId& b);

/// `count` internally vertex-disjoint a-b paths found by unit-capacity
/// max-flow on the node-split graph. Deterministic: nodes are explored in
/// lexicographic order and the result is sorted by (hop count, node names).
/// Throws InsufficientConnectivity carrying the achievable maximum.
PathSet vertex_disjoint_paths(const NetworkGraph& graph, const NodeId& a,
                              const NodeId& b, std::size_t count);

/// Empty string when `paths` is a valid disjoint a-b path set of `graph`,
/// otherwise a description of the first violation.
std::string check_path_set(const NetworkGraph& graph, const NodeId& a,
                           const NodeId& b, const PathSet& paths);

enum class TransmissionMode { kOneWay, kTwoWay, kFeedbackDisjoint };

std::optional<TransmissionMode> parse_transmission_mode(std::string_view name);

/// Disjoint paths needed for private transmission against t corrupted nodes:
/// 3t+1 one-way, 2t+1 two-way, max(3t+1-2u, 2t+1) with u disjoint feedback
/// paths. `u` is ignored outside the feedback mode.
std::size_t required_paths(std::size_t t, std::size_t u, TransmissionMode mode);

struct RateModel {
  double r0_bps = 100e3;
  double attenuation_db_per_km = 0.25;
  double knee_km = 60.0;
  double cutoff_scale_km = 15.0;
  double max_distance_km = 100.0;
};

/// Secret key rate in bit/s; exponential loss, an extra roll-off past the
/// knee and zero from max_distance_km on. Nonincreasing in distance.
double link_rate(double distance_km, const RateModel& model = {});

}  // namespace qkdnet
