#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qkdnet/error.hpp"
#include "qkdnet/sim.hpp"

namespace qkdnet {
namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::kParseError, "field " + field + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    field_error(path + key, "missing");
  }
  return obj.at(key);
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) field_error(field, "expected string");
  return v.get<std::string>();
}

std::uint64_t as_unsigned(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() &&
      !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    field_error(field, "expected non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) field_error(field, "expected boolean");
  return v.get<bool>();
}

template <typename T, typename F>
T optional_field(const json& obj, const std::string& key, const std::string& path,
                 T fallback, F&& convert) {
  if (!obj.contains(key) || obj.at(key).is_null()) {
    return fallback;
  }
  return convert(obj.at(key), path + key);
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<long>(end), '\n'));
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::kValidationError, what);
}

}  // namespace

double path_epsilon(const NetworkGraph& graph, const PathSet& paths) {
  double clean = 1.0;
  for (const Path& p : paths.paths) {
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      if (const QkdLink* l = graph.find_link(p[k], p[k + 1])) {
        clean *= 1.0 - l->epsilon;
      }
    }
  }
  return 1.0 - clean;
}

Scenario parse_scenario(std::string_view text, std::optional<std::size_t> ell) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParseError,
                "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kParseError, "line 1: top level must be an object");
  }

  Scenario sc;
  sc.name = optional_field(doc, "name", "", std::string{}, as_string);

  const json& nodes = require(doc, "nodes", "");
  if (!nodes.is_array()) field_error("nodes", "expected array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string id = as_string(nodes[i], "nodes[" + std::to_string(i) + "]");
    try {
      sc.graph.add_node(id);
    } catch (const Error& e) {
      invalid(e.what());
    }
  }

  const json& links = require(doc, "links", "");
  if (!links.is_array()) field_error("links", "expected array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string p = "links[" + std::to_string(i) + "].";
    const json& l = links[i];
    QkdLink link;
    link.a = as_string(require(l, "a", p), p + "a");
    link.b = as_string(require(l, "b", p), p + "b");
    link.distance_km = optional_field(l, "distance_km", p, 0.0, as_number);
    link.epsilon = optional_field(l, "epsilon", p, 0.0, as_number);
    link.alive = optional_field(l, "alive", p, true, as_bool);
    try {
      sc.graph.add_link(std::move(link));
    } catch (const Error& e) {
      invalid(e.what());
    }
  }
  if (!sc.graph.connected()) {
    invalid("network graph must be connected");
  }

  sc.alice = as_string(require(doc, "alice", ""), "alice");
  sc.bob = as_string(require(doc, "bob", ""), "bob");
  for (const auto& who : {sc.alice, sc.bob}) {
    if (!sc.graph.has_node(who)) invalid("endpoint " + who + " is not a node");
  }
  if (sc.alice == sc.bob) invalid("alice and bob must differ");

  const json& params = require(doc, "params", "");
  sc.params.n = as_unsigned(require(params, "n", "params."), "params.n");
  sc.params.m = as_unsigned(require(params, "m", "params."), "params.m");
  sc.params.ell = ell ? *ell : as_unsigned(require(params, "ell", "params."), "params.ell");
  sc.params.w = static_cast<unsigned>(
      as_unsigned(require(params, "w", "params."), "params.w"));
  if (params.contains("s") &&
      as_unsigned(params.at("s"), "params.s") != sc.params.mac_key_bits()) {
    invalid("s = 2w required (s=" + std::to_string(as_unsigned(params.at("s"), "params.s")) +
            ", w=" + std::to_string(sc.params.w) + ")");
  }
  try {
    sc.params.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }

  sc.trials = optional_field(doc, "trials", "", std::uint64_t{1}, as_unsigned);
  sc.seed = optional_field(doc, "seed", "", std::uint64_t{0}, as_unsigned);
  sc.exact_privacy = optional_field(doc, "exact_privacy", "", false, as_bool);
  if (doc.contains("transport")) {
    const json& t = doc.at("transport");
    sc.hop_mac.word_bits = static_cast<unsigned>(
        optional_field(t, "hop_mac_bits", "transport.", std::uint64_t{32}, as_unsigned));
    if (t.contains("pool_bits") && !t.at("pool_bits").is_null()) {
      sc.pool_bits = as_unsigned(t.at("pool_bits"), "transport.pool_bits");
    }
  }
  try {
    sc.hop_mac.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }

  std::set<NodeId> corrupted;
  std::size_t t = 0;
  std::vector<Strategy> strategies{Strategy::kPassive};
  TamperRegion region = TamperRegion::kBody;
  BitString substitute;
  if (doc.contains("adversary")) {
    const json& a = doc.at("adversary");
    const std::string p = "adversary.";
    if (a.contains("corrupted")) {
      const json& list = a.at("corrupted");
      if (!list.is_array()) field_error(p + "corrupted", "expected array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        corrupted.insert(as_string(list[i], p + "corrupted[" + std::to_string(i) + "]"));
      }
    }
    t = optional_field(a, "t", p, std::uint64_t{corrupted.size()}, as_unsigned);
    if (a.contains("strategies")) {
      const json& list = a.at("strategies");
      if (!list.is_array()) field_error(p + "strategies", "expected array");
      strategies.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string f = p + "strategies[" + std::to_string(i) + "]";
        auto s = parse_strategy(as_string(list[i], f));
        if (!s) field_error(f, "unknown strategy");
        strategies.push_back(*s);
      }
    }
    const std::string r = optional_field(a, "tamper_region", p, std::string("body"), as_string);
    if (r == "any") {
      region = TamperRegion::kAny;
    } else if (r != "body") {
      field_error(p + "tamper_region", "expected body or any");
    }
    if (a.contains("substitute")) {
      try {
        substitute = BitString::from_string(as_string(a.at("substitute"), p + "substitute"));
      } catch (const Error&) {
        field_error(p + "substitute", "expected a 0/1 string");
      }
    }
  }
  try {
    sc.adversary = corrupt(sc.graph, sc.alice, sc.bob, corrupted, t, strategies);
  } catch (const Error& e) {
    invalid(e.what());
  }
  sc.adversary.tamper_region = region;
  sc.adversary.substitute_payload = std::move(substitute);

  try {
    sc.paths = vertex_disjoint_paths(sc.graph, sc.alice, sc.bob, sc.params.ell);
  } catch (const InsufficientConnectivity& e) {
    invalid("ell=" + std::to_string(sc.params.ell) +
            " disjoint paths required, graph has " + std::to_string(e.achievable()));
  }
  sc.params.epsilon = path_epsilon(sc.graph, sc.paths);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file,
                       std::optional<std::size_t> ell) {
  std::ifstream in(file);
  if (!in) {
    throw Error(ErrorKind::kIoError, "cannot read " + file.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), ell);
}

}  // namespace qkdnet
