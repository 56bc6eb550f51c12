#include "qkdnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "qkdnet/error.hpp"

namespace qkdnet {

void NetworkGraph::add_node(const NodeId& id) {
  if (id.empty()) {
    throw Error(ErrorKind::kValidationError, "node id must be non-empty");
  }
  if (index_.contains(id)) {
    throw Error(ErrorKind::kValidationError, "duplicate node " + id);
  }
  index_.emplace(id, nodes_.size());
  nodes_.push_back(id);
}

void NetworkGraph::add_link(QkdLink link) {
  if (!has_node(link.a) || !has_node(link.b)) {
    throw Error(ErrorKind::kValidationError,
                "link " + link.a + "-" + link.b + " references unknown node");
  }
  if (link.a == link.b) {
    throw Error(ErrorKind::kValidationError, "self-loop at " + link.a);
  }
  if (!(link.epsilon >= 0.0 && link.epsilon <= 1.0)) {
    throw Error(ErrorKind::kValidationError,
                "link " + link.a + "-" + link.b + " epsilon outside [0,1]");
  }
  if (!(link.distance_km >= 0.0)) {
    throw Error(ErrorKind::kValidationError,
                "link " + link.a + "-" + link.b + " negative distance");
  }
  if (find_link(link.a, link.b) != nullptr) {
    throw Error(ErrorKind::kValidationError,
                "duplicate link " + link.a + "-" + link.b);
  }
  links_.push_back(std::move(link));
}

void NetworkGraph::set_alive(const NodeId& a, const NodeId& b, bool alive) {
  for (auto& l : links_) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
      l.alive = alive;
      return;
    }
  }
  throw Error(ErrorKind::kValidationError, "no link " + a + "-" + b);
}

const QkdLink* NetworkGraph::find_link(const NodeId& a, const NodeId& b) const {
  for (const auto& l : links_) {
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
      return &l;
    }
  }
  return nullptr;
}

std::vector<NodeId> NetworkGraph::neighbors(const NodeId& id) const {
  std::vector<NodeId> out;
  for (const auto& l : links_) {
    if (!l.alive) {
      continue;
    }
    if (l.a == id) {
      out.push_back(l.b);
    } else if (l.b == id) {
      out.push_back(l.a);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool NetworkGraph::connected() const {
  if (nodes_.empty()) {
    return true;
  }
  std::set<NodeId> seen{nodes_.front()};
  std::vector<NodeId> stack{nodes_.front()};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    for (const auto& l : links_) {
      const NodeId* other = nullptr;
      if (l.a == cur) {
        other = &l.b;
      } else if (l.b == cur) {
        other = &l.a;
      }
      if (other != nullptr && seen.insert(*other).second) {
        stack.push_back(*other);
      }
    }
  }
  return seen.size() == nodes_.size();
}

namespace {

// Edmonds-Karp on the node-split graph: node v becomes in(v)=2v -> out(v)=2v+1
// with capacity 1 (unbounded for the endpoints), each alive link u-v becomes
// out(u)->in(v) and out(v)->in(u) with capacity 1.
class SplitFlow {
 public:
  SplitFlow(const NetworkGraph& graph, const NodeId& a, const NodeId& b) {
    names_ = graph.nodes();
    std::sort(names_.begin(), names_.end());
    for (std::size_t i = 0; i < names_.size(); ++i) {
      id_[names_[i]] = i;
    }
    if (!id_.contains(a) || !id_.contains(b)) {
      throw Error(ErrorKind::kValidationError, "endpoint not in graph");
    }
    if (a == b) {
      throw Error(ErrorKind::kValidationError, "endpoints must differ");
    }
    source_ = id_[a];
    sink_ = id_[b];
    adj_.resize(2 * names_.size());
    const long big = static_cast<long>(names_.size()) + 1;
    for (std::size_t v = 0; v < names_.size(); ++v) {
      const bool endpoint = v == source_ || v == sink_;
      add_edge(2 * v, 2 * v + 1, endpoint ? big : 1);
    }
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    for (const auto& l : graph.links()) {
      if (!l.alive) {
        continue;
      }
      arcs.emplace_back(id_[l.a], id_[l.b]);
      arcs.emplace_back(id_[l.b], id_[l.a]);
    }
    std::sort(arcs.begin(), arcs.end());
    for (auto [u, v] : arcs) {
      add_edge(2 * u + 1, 2 * v, 1);
    }
  }

  std::size_t run(std::size_t limit) {
    std::size_t flow = 0;
    while (flow < limit && augment()) {
      ++flow;
    }
    return flow;
  }

  std::vector<Path> decompose() {
    // Opposite unit flows on one link cancel without changing the flow value.
    for (auto& e : edges_) {
      if (e.is_link && e.flow == 1) {
        Edge& back_link = edges_[e.twin_link];
        if (back_link.flow == 1) {
          e.flow = 0;
          edges_[e.rev].flow = 0;
          back_link.flow = 0;
          edges_[back_link.rev].flow = 0;
        }
      }
    }
    std::vector<Path> paths;
    for (std::size_t ei : adj_[2 * source_ + 1]) {
      Edge& first = edges_[ei];
      if (!first.is_link || first.flow != 1) {
        continue;
      }
      first.flow = 0;
      Path p{names_[source_]};
      std::size_t node = first.to / 2;
      while (node != sink_) {
        p.push_back(names_[node]);
        bool moved = false;
        for (std::size_t nj : adj_[2 * node + 1]) {
          Edge& e = edges_[nj];
          if (e.is_link && e.flow == 1) {
            e.flow = 0;
            node = e.to / 2;
            moved = true;
            break;
          }
        }
        if (!moved) {
          throw std::logic_error("flow decomposition lost conservation");
        }
      }
      p.push_back(names_[sink_]);
      paths.push_back(std::move(p));
    }
    return paths;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    long cap;
    long flow = 0;  // antisymmetric: rev.flow == -flow
    bool is_link = false;
    std::size_t twin_link = 0;  // forward edge of the opposite link direction
  };

  void add_edge(std::size_t from, std::size_t to, long cap) {
    const bool is_link = (from % 2 == 1) && (to % 2 == 0);
    edges_.push_back(Edge{to, edges_.size() + 1, cap, 0, is_link, 0});
    edges_.push_back(Edge{from, edges_.size() - 1, 0, 0, false, 0});
    adj_[from].push_back(edges_.size() - 2);
    adj_[to].push_back(edges_.size() - 1);
    if (is_link) {
      const std::size_t me = edges_.size() - 2;
      const auto key = std::make_pair(to / 2, from / 2);
      if (auto it = link_edge_.find(key); it != link_edge_.end()) {
        edges_[me].twin_link = it->second;
        edges_[it->second].twin_link = me;
      }
      link_edge_[{from / 2, to / 2}] = me;
    }
  }

  bool augment() {
    const std::size_t s = 2 * source_ + 1;
    const std::size_t t = 2 * sink_;
    std::vector<std::size_t> via(adj_.size(), std::numeric_limits<std::size_t>::max());
    std::vector<bool> seen(adj_.size(), false);
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty() && !seen[t]) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t ei : adj_[u]) {
        const Edge& e = edges_[ei];
        if (!seen[e.to] && e.cap > e.flow) {
          seen[e.to] = true;
          via[e.to] = ei;
          q.push(e.to);
        }
      }
    }
    if (!seen[t]) {
      return false;
    }
    for (std::size_t v = t; v != s;) {
      Edge& e = edges_[via[v]];
      Edge& r = edges_[e.rev];
      e.flow += 1;
      r.flow -= 1;
      v = r.to;
    }
    return true;
  }

  std::vector<NodeId> names_;
  std::map<NodeId, std::size_t> id_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> link_edge_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::size_t source_ = 0;
  std::size_t sink_ = 0;
};

}  // namespace

std::size_t max_disjoint_paths(const NetworkGraph& graph, const NodeId& a,
                               const NodeId& b) {
  SplitFlow flow(graph, a, b);
  return flow.run(std::numeric_limits<std::size_t>::max());
}

PathSet vertex_disjoint_paths(const NetworkGraph& graph, const NodeId& a,
                              const NodeId& b, std::size_t count) {
  SplitFlow flow(graph, a, b);
  const std::size_t got = flow.run(count);
  if (got < count) {
    throw InsufficientConnectivity(count, max_disjoint_paths(graph, a, b));
  }
  PathSet out{flow.decompose()};
  std::sort(out.paths.begin(), out.paths.end(),
            [](const Path& x, const Path& y) {
              if (x.size() != y.size()) {
                return x.size() < y.size();
              }
              return x < y;
            });
  return out;
}

std::string check_path_set(const NetworkGraph& graph, const NodeId& a,
                           const NodeId& b, const PathSet& paths) {
  std::set<NodeId> used;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Path& p = paths[i];
    const std::string tag = "path " + std::to_string(i + 1);
    if (p.size() < 2 || p.front() != a || p.back() != b) {
      return tag + " does not run from " + a + " to " + b;
    }
    std::set<NodeId> own;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!own.insert(p[k]).second) {
        return tag + " repeats node " + p[k];
      }
      if (k + 1 < p.size()) {
        const QkdLink* l = graph.find_link(p[k], p[k + 1]);
        if (l == nullptr || !l->alive) {
          return tag + " uses missing link " + p[k] + "-" + p[k + 1];
        }
      }
      if (k > 0 && k + 1 < p.size() && !used.insert(p[k]).second) {
        return tag + " shares internal node " + p[k];
      }
    }
    if (p.size() == 2) {
      // The direct link can carry only one path.
      if (!used.insert("\x01direct").second) {
        return tag + " reuses the direct link";
      }
    }
  }
  return {};
}

std::optional<TransmissionMode> parse_transmission_mode(std::string_view name) {
  if (name == "one_way") return TransmissionMode::kOneWay;
  if (name == "two_way") return TransmissionMode::kTwoWay;
  if (name == "feedback" || name == "feedback_disjoint") {
    return TransmissionMode::kFeedbackDisjoint;
  }
  return std::nullopt;
}

std::size_t required_paths(std::size_t t, std::size_t u, TransmissionMode mode) {
  switch (mode) {
    case TransmissionMode::kOneWay:
      return 3 * t + 1;
    case TransmissionMode::kTwoWay:
      return 2 * t + 1;
    case TransmissionMode::kFeedbackDisjoint: {
      const std::size_t floor = 2 * t + 1;
      // 3t+1-2u in signed arithmetic; anything below the floor clamps to it.
      if (3 * t + 1 <= 2 * u) {
        return floor;
      }
      return std::max(3 * t + 1 - 2 * u, floor);
    }
  }
  return 0;
}

double link_rate(double distance_km, const RateModel& model) {
  if (distance_km < 0.0) {
    throw Error(ErrorKind::kOutOfRange, "negative distance");
  }
  if (distance_km >= model.max_distance_km) {
    return 0.0;
  }
  double rate =
      model.r0_bps * std::pow(10.0, -model.attenuation_db_per_km * distance_km / 10.0);
  if (distance_km > model.knee_km) {
    rate *= std::exp(-(distance_km - model.knee_km) / model.cutoff_scale_km);
  }
  return rate;
}

}  // namespace qkdnet
