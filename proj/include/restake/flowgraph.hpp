#pragma once

// Value-flow graph of staking, restaking, bridging and DeFi positions, with
// de-duplicated ("uninflated") aggregates and exposure-path enumeration.
// All amounts are ETH-equivalents.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/io.hpp"

namespace restake::flow {

enum class NodeKind {
  BaseAsset,
  StakingPool,
  LiquidStakingProtocol,
  RestakingInfra,
  LiquidRestakingProtocol,
  BridgeContract,
  Rollup,
  LendingPool,
  DexPool,
  YieldProtocol,
};

enum class EdgeKind { Stake, Mint, Restake, Bridge, Wrap, Collateralize, ProvideLiquidity };

inline constexpr std::array<std::pair<NodeKind, std::string_view>, 10> kNodeKindNames{{
    {NodeKind::BaseAsset, "BaseAsset"},
    {NodeKind::StakingPool, "StakingPool"},
    {NodeKind::LiquidStakingProtocol, "LiquidStakingProtocol"},
    {NodeKind::RestakingInfra, "RestakingInfra"},
    {NodeKind::LiquidRestakingProtocol, "LiquidRestakingProtocol"},
    {NodeKind::BridgeContract, "BridgeContract"},
    {NodeKind::Rollup, "Rollup"},
    {NodeKind::LendingPool, "LendingPool"},
    {NodeKind::DexPool, "DexPool"},
    {NodeKind::YieldProtocol, "YieldProtocol"},
}};

inline constexpr std::array<std::pair<EdgeKind, std::string_view>, 7> kEdgeKindNames{{
    {EdgeKind::Stake, "Stake"},
    {EdgeKind::Mint, "Mint"},
    {EdgeKind::Restake, "Restake"},
    {EdgeKind::Bridge, "Bridge"},
    {EdgeKind::Wrap, "Wrap"},
    {EdgeKind::Collateralize, "Collateralize"},
    {EdgeKind::ProvideLiquidity, "ProvideLiquidity"},
}};

inline std::string_view to_string(NodeKind k) {
  for (const auto& [kind, name] : kNodeKindNames)
    if (kind == k) return name;
  return "?";
}

inline std::string_view to_string(EdgeKind k) {
  for (const auto& [kind, name] : kEdgeKindNames)
    if (kind == k) return name;
  return "?";
}

inline NodeKind parse_node_kind(std::string_view s) {
  for (const auto& [kind, name] : kNodeKindNames)
    if (name == s) return kind;
  throw DataError("unknown node kind '" + std::string(s) + "'");
}

inline EdgeKind parse_edge_kind(std::string_view s) {
  for (const auto& [kind, name] : kEdgeKindNames)
    if (name == s) return kind;
  throw DataError("unknown edge kind '" + std::string(s) + "'");
}

struct FlowNode {
  std::string id;
  NodeKind kind = NodeKind::BaseAsset;
  std::string chain;
  double balance = 0;

  bool operator==(const FlowNode&) const = default;
};

/// `derivative_of` names the node whose value this edge re-represents at its
/// destination: `amount` of `to`'s balance is already counted in that node.
struct FlowEdge {
  std::string from;
  std::string to;
  EdgeKind kind = EdgeKind::Stake;
  double amount = 0;
  std::optional<std::string> derivative_of;

  bool operator==(const FlowEdge&) const = default;
};

struct LoadOptions {
  /// Downgrade "edge amount exceeds source balance" from an error to a warning.
  bool allow_stale = false;
};

/// Immutable snapshot of the value-flow map. Construct through `FlowGraph::build`
/// or one of the loaders; every invariant is checked there.
class FlowGraph {
 public:
  FlowGraph() = default;

  static FlowGraph build(std::vector<FlowNode> nodes, std::vector<FlowEdge> edges,
                         std::optional<Date> snapshot_date = std::nullopt,
                         std::optional<double> eth_usd_price = std::nullopt,
                         const LoadOptions& options = {}) {
    FlowGraph g;
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);
    g.snapshot_date_ = snapshot_date;
    g.eth_usd_price_ = eth_usd_price;
    g.validate(options);
    return g;
  }

  const std::vector<FlowNode>& nodes() const noexcept { return nodes_; }
  const std::vector<FlowEdge>& edges() const noexcept { return edges_; }
  const std::optional<Date>& snapshot_date() const noexcept { return snapshot_date_; }
  const std::optional<double>& eth_usd_price() const noexcept { return eth_usd_price_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const nlohmann::json& metadata() const noexcept { return metadata_; }

  bool contains(std::string_view id) const { return index_.find(std::string(id)) != index_.end(); }

  const FlowNode& node(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw ValidationError("unknown node '" + std::string(id) + "'");
    return nodes_[it->second];
  }

  std::vector<const FlowEdge*> out_edges(std::string_view id) const {
    std::vector<const FlowEdge*> out;
    for (const auto& e : edges_)
      if (e.from == id) out.push_back(&e);
    return out;
  }

  /// Nodes whose value `id` holds a re-representation of (one derivative step).
  const std::set<std::string>& derivative_parents(const std::string& id) const {
    static const std::set<std::string> kEmpty;
    auto it = derivative_parents_.find(id);
    return it == derivative_parents_.end() ? kEmpty : it->second;
  }

  /// `id` plus every node reachable by following derivative_of links from it.
  std::set<std::string> derivative_closure(const std::string& id) const {
    std::set<std::string> seen{id};
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
      const std::string cur = stack.back();
      stack.pop_back();
      for (const auto& p : derivative_parents(cur))
        if (seen.insert(p).second) stack.push_back(p);
    }
    return seen;
  }

  double total_balance(NodeKind kind) const {
    double sum = 0;
    for (const auto& n : nodes_)
      if (n.kind == kind) sum += n.balance;
    return sum;
  }

  void set_metadata(nlohmann::json meta) { metadata_ = std::move(meta); }

 private:
  void validate(const LoadOptions& options) {
    index_.clear();
    warnings_.clear();
    derivative_parents_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (n.id.empty()) throw DataError("node with empty id");
      if (!std::isfinite(n.balance) || n.balance < 0)
        throw DataError("node '" + n.id + "' has invalid balance");
      if (!index_.emplace(n.id, i).second) throw DataError("duplicate node id '" + n.id + "'");
    }
    if (eth_usd_price_ && !(*eth_usd_price_ > 0 && std::isfinite(*eth_usd_price_)))
      throw DataError("eth_usd_price must be positive");
    for (const auto& e : edges_) {
      const std::string label = e.from + " -> " + e.to;
      if (!contains(e.from) || !contains(e.to))
        throw DataError("edge " + label + " has a dangling endpoint");
      if (!std::isfinite(e.amount) || e.amount < 0)
        throw DataError("edge " + label + " has invalid amount");
      if ((e.kind == EdgeKind::Bridge || e.kind == EdgeKind::Wrap) && !e.derivative_of)
        throw DataError("edge " + label + " is a " + std::string(to_string(e.kind)) +
                        " edge without derivative_of");
      if (e.derivative_of) {
        if (!contains(*e.derivative_of))
          throw DataError("edge " + label + " derives from unknown node '" + *e.derivative_of +
                          "'");
        if (*e.derivative_of == e.to)
          throw DataError("derivative cycle: edge " + label + " derives " + e.to + " from itself");
        derivative_parents_[e.to].insert(*e.derivative_of);
      }
      const double from_balance = nodes_[index_.at(e.from)].balance;
      if (e.amount > from_balance) {
        const std::string msg = "edge " + label + " amount " + format_double(e.amount) +
                                " exceeds source balance " + format_double(from_balance);
        if (!options.allow_stale) throw DataError(msg + " (use allow-stale for stale snapshots)");
        warnings_.push_back(msg);
      }
    }
    check_acyclic();
  }

  void check_acyclic() const {
    enum class Mark { None, Active, Done };
    std::map<std::string, Mark> mark;
    std::function<void(const std::string&)> visit = [&](const std::string& id) {
      mark[id] = Mark::Active;
      for (const auto& p : derivative_parents(id)) {
        const Mark m = mark[p];
        if (m == Mark::Active) throw DataError("derivative cycle through '" + p + "'");
        if (m == Mark::None) visit(p);
      }
      mark[id] = Mark::Done;
    };
    for (const auto& n : nodes_)
      if (mark[n.id] == Mark::None) visit(n.id);
  }

  std::vector<FlowNode> nodes_;
  std::vector<FlowEdge> edges_;
  std::optional<Date> snapshot_date_;
  std::optional<double> eth_usd_price_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::set<std::string>> derivative_parents_;
  std::vector<std::string> warnings_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

// ---------------------------------------------------------------------------
// Loading

/// Names a graph document: a bundled fixture name, a file, or inline JSON text.
struct BundledFixture {
  std::string name;
};
struct FixtureFile {
  std::filesystem::path path;
};
struct InlineDocument {
  std::string json;
};
using GraphSource = std::variant<BundledFixture, FixtureFile, InlineDocument>;

#ifndef RESTAKE_DATA_DIR
#define RESTAKE_DATA_DIR "data"
#endif

/// Directory holding bundled fixtures; RESTAKE_DATA_DIR overrides the build default.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("RESTAKE_DATA_DIR"); env && *env) return env;
  return RESTAKE_DATA_DIR;
}

inline FlowGraph parse_graph(const nlohmann::json& doc, const LoadOptions& options = {}) {
  if (!doc.is_object()) throw DataError("graph document must be a JSON object");
  try {
    std::vector<FlowNode> nodes;
    std::vector<FlowEdge> edges;
    if (doc.contains("nodes")) {
      for (const auto& n : doc.at("nodes")) {
        nodes.push_back(FlowNode{n.at("id").get<std::string>(),
                                 parse_node_kind(n.at("kind").get<std::string>()),
                                 n.value("chain", std::string{}), n.at("balance").get<double>()});
      }
    }
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        FlowEdge edge{e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                      parse_edge_kind(e.at("kind").get<std::string>()),
                      e.at("amount").get<double>(), std::nullopt};
        if (e.contains("derivative_of") && !e.at("derivative_of").is_null())
          edge.derivative_of = e.at("derivative_of").get<std::string>();
        edges.push_back(std::move(edge));
      }
    }
    std::optional<Date> snapshot;
    if (doc.contains("snapshot_date") && !doc.at("snapshot_date").is_null())
      snapshot = Date::parse(doc.at("snapshot_date").get<std::string>());
    std::optional<double> price;
    if (doc.contains("eth_usd_price") && !doc.at("eth_usd_price").is_null())
      price = doc.at("eth_usd_price").get<double>();
    FlowGraph g = FlowGraph::build(std::move(nodes), std::move(edges), snapshot, price, options);
    if (doc.contains("metadata")) g.set_metadata(doc.at("metadata"));
    return g;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed graph document: ") + ex.what());
  }
}

inline FlowGraph load_graph(const GraphSource& source, const LoadOptions& options = {}) {
  auto parse_text = [&](const std::string& text) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& ex) {
      throw DataError(std::string("malformed graph document: ") + ex.what());
    }
    return parse_graph(doc, options);
  };
  return std::visit(
      [&](const auto& src) -> FlowGraph {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, BundledFixture>) {
          return parse_text(read_file(data_dir() / (src.name + ".json")));
        } else if constexpr (std::is_same_v<T, FixtureFile>) {
          return parse_text(read_file(src.path));
        } else {
          return parse_text(src.json);
        }
      },
      source);
}

inline nlohmann::ordered_json to_json(const FlowGraph& g) {
  nlohmann::ordered_json doc;
  doc["snapshot_date"] = g.snapshot_date() ? nlohmann::ordered_json(g.snapshot_date()->iso())
                                           : nlohmann::ordered_json(nullptr);
  doc["eth_usd_price"] =
      g.eth_usd_price() ? nlohmann::ordered_json(*g.eth_usd_price()) : nlohmann::ordered_json(nullptr);
  auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"kind", std::string(to_string(n.kind))},
                     {"chain", n.chain},
                     {"balance", n.balance}});
  }
  auto& edges = doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) {
    nlohmann::ordered_json je{{"from", e.from},
                              {"to", e.to},
                              {"kind", std::string(to_string(e.kind))},
                              {"amount", e.amount}};
    je["derivative_of"] = e.derivative_of ? nlohmann::ordered_json(*e.derivative_of)
                                          : nlohmann::ordered_json(nullptr);
    edges.push_back(std::move(je));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Aggregates

/// Sum of in-scope balances counting each underlying unit once. An edge's
/// amount is removed when its destination is in scope and some node on the
/// derivative chain of its `derivative_of` is in scope too.
inline double uninflated_tvl(const FlowGraph& g, const std::set<std::string>& scope) {
  for (const auto& id : scope)
    if (!g.contains(id)) throw ValidationError("scope node '" + id + "' is not in the graph");
  double total = 0;
  for (const auto& id : scope) total += g.node(id).balance;
  std::map<std::string, bool> chain_hits_scope;
  for (const auto& e : g.edges()) {
    if (!e.derivative_of || !scope.contains(e.to)) continue;
    auto [it, inserted] = chain_hits_scope.try_emplace(*e.derivative_of, false);
    if (inserted) {
      for (const auto& id : g.derivative_closure(*e.derivative_of)) {
        if (scope.contains(id)) {
          it->second = true;
          break;
        }
      }
    }
    if (it->second) total -= e.amount;
  }
  return total;
}

inline double naive_tvl(const FlowGraph& g, const std::set<std::string>& scope) {
  double total = 0;
  for (const auto& id : scope) total += g.node(id).balance;
  return total;
}

inline std::set<std::string> all_node_ids(const FlowGraph& g) {
  std::set<std::string> ids;
  for (const auto& n : g.nodes()) ids.insert(n.id);
  return ids;
}

/// Fraction of `token_node`'s total supply (home balance + bridged/wrapped
/// amounts) that sits on other chains, optionally restricted to one chain.
inline double bridged_share(const FlowGraph& g, std::string_view token_node,
                            const std::optional<std::string>& destination_chain = std::nullopt) {
  const FlowNode& token = g.node(token_node);
  double bridged_all = 0;
  double bridged_selected = 0;
  for (const FlowEdge* e : g.out_edges(token_node)) {
    if (e->kind != EdgeKind::Bridge && e->kind != EdgeKind::Wrap) continue;
    bridged_all += e->amount;
    if (!destination_chain || g.node(e->to).chain == *destination_chain)
      bridged_selected += e->amount;
  }
  const double supply = token.balance + bridged_all;
  if (supply <= 0)
    throw UndefinedRatioError("token '" + token.id + "' has zero total supply");
  return bridged_selected / supply;
}

/// Destination chains reached by `token_node`'s Bridge/Wrap edges, sorted.
inline std::vector<std::string> bridge_destinations(const FlowGraph& g, std::string_view token_node) {
  std::set<std::string> chains;
  for (const FlowEdge* e : g.out_edges(token_node))
    if (e->kind == EdgeKind::Bridge || e->kind == EdgeKind::Wrap) chains.insert(g.node(e->to).chain);
  return {chains.begin(), chains.end()};
}

struct SecurityMargin {
  double restaked_fraction = 0;
  double margin = 0;
  bool at_risk = false;
  double threshold = 1.0 / 3.0;
};

inline SecurityMargin network_security_margin(double staked_total, double restaked_total,
                                              double finality_threshold = 1.0 / 3.0) {
  if (!(staked_total > 0) || !std::isfinite(staked_total))
    throw ValidationError("staked_total must be positive");
  if (!(restaked_total >= 0) || !std::isfinite(restaked_total))
    throw ValidationError("restaked_total must be non-negative");
  SecurityMargin m;
  m.threshold = finality_threshold;
  m.restaked_fraction = restaked_total / staked_total;
  m.margin = finality_threshold - m.restaked_fraction;
  m.at_risk = m.restaked_fraction >= finality_threshold;
  return m;
}

/// Staked total = sum of StakingPool balances; restaked total = sum of
/// RestakingInfra balances.
inline SecurityMargin network_security_margin(const FlowGraph& g,
                                              double finality_threshold = 1.0 / 3.0) {
  return network_security_margin(g.total_balance(NodeKind::StakingPool),
                                 g.total_balance(NodeKind::RestakingInfra), finality_threshold);
}

// ---------------------------------------------------------------------------
// Exposure paths

struct ExposurePath {
  std::vector<std::string> nodes;
  std::vector<FlowEdge> edges;
  /// Minimum edge amount along the path; empty for the zero-length path.
  std::optional<double> bottleneck;
};

namespace detail {
inline bool path_less(const ExposurePath& a, const ExposurePath& b) {
  if (a.nodes != b.nodes) return a.nodes < b.nodes;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    if (a.edges[i].kind != b.edges[i].kind) return a.edges[i].kind < b.edges[i].kind;
    if (a.edges[i].amount != b.edges[i].amount) return a.edges[i].amount < b.edges[i].amount;
    if (a.edges[i].derivative_of != b.edges[i].derivative_of)
      return a.edges[i].derivative_of < b.edges[i].derivative_of;
  }
  return false;
}
}  // namespace detail

/// Simple paths source -> sink of at most `max_depth` edges, ordered
/// lexicographically by node-id sequence.
inline std::vector<ExposurePath> exposure_paths(const FlowGraph& g, const std::string& source,
                                                const std::string& sink, int max_depth) {
  if (!g.contains(source) || !g.contains(sink))
    throw ValidationError("exposure_paths endpoints must exist");
  if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
  std::vector<ExposurePath> out;
  if (source == sink) {
    out.push_back(ExposurePath{{source}, {}, std::nullopt});
    return out;
  }
  std::map<std::string, std::vector<const FlowEdge*>> adjacency;
  for (const auto& e : g.edges()) adjacency[e.from].push_back(&e);

  ExposurePath current{{source}, {}, std::nullopt};
  std::set<std::string> on_path{source};
  std::function<void()> dfs = [&]() {
    const std::string at = current.nodes.back();
    if (at == sink) {
      ExposurePath p = current;
      double b = std::numeric_limits<double>::infinity();
      for (const auto& e : p.edges) b = std::min(b, e.amount);
      p.bottleneck = b;
      out.push_back(std::move(p));
      return;
    }
    if (static_cast<int>(current.edges.size()) >= max_depth) return;
    auto it = adjacency.find(at);
    if (it == adjacency.end()) return;
    for (const FlowEdge* e : it->second) {
      if (on_path.contains(e->to)) continue;
      on_path.insert(e->to);
      current.nodes.push_back(e->to);
      current.edges.push_back(*e);
      dfs();
      current.edges.pop_back();
      current.nodes.pop_back();
      on_path.erase(e->to);
    }
  };
  dfs();
  std::sort(out.begin(), out.end(), detail::path_less);
  return out;
}

inline nlohmann::ordered_json to_json(const ExposurePath& p) {
  nlohmann::ordered_json j;
  j["nodes"] = p.nodes;
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : p.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"kind", std::string(to_string(e.kind))},
                     {"amount", e.amount}});
  }
  j["bottleneck"] = p.bottleneck ? nlohmann::ordered_json(*p.bottleneck) : nlohmann::ordered_json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Metrics bundle served to the explorer and printed by `graph metrics`.

struct GraphMetrics {
  double naive_tvl = 0;
  double uninflated_tvl = 0;
  SecurityMargin security;
  struct Bridged {
    std::string token;
    double share_all = 0;
    std::map<std::string, double> share_by_chain;
  };
  std::vector<Bridged> bridged;
};

inline GraphMetrics compute_metrics(const FlowGraph& g, double finality_threshold = 1.0 / 3.0) {
  GraphMetrics m;
  const auto ids = all_node_ids(g);
  m.naive_tvl = naive_tvl(g, ids);
  m.uninflated_tvl = uninflated_tvl(g, ids);
  if (g.total_balance(NodeKind::StakingPool) > 0) m.security = network_security_margin(g, finality_threshold);
  for (const auto& n : g.nodes()) {
    const auto chains = bridge_destinations(g, n.id);
    if (chains.empty()) continue;
    GraphMetrics::Bridged b;
    b.token = n.id;
    b.share_all = bridged_share(g, n.id);
    for (const auto& c : chains) b.share_by_chain[c] = bridged_share(g, n.id, c);
    m.bridged.push_back(std::move(b));
  }
  return m;
}

inline nlohmann::ordered_json to_json(const GraphMetrics& m) {
  nlohmann::ordered_json j;
  j["naive_tvl"] = m.naive_tvl;
  j["uninflated_tvl"] = m.uninflated_tvl;
  j["security_margin"] = {{"restaked_fraction", m.security.restaked_fraction},
                          {"margin", m.security.margin},
                          {"at_risk", m.security.at_risk},
                          {"threshold", m.security.threshold}};
  auto& bridged = j["bridged"] = nlohmann::ordered_json::array();
  for (const auto& b : m.bridged) {
    nlohmann::ordered_json by_chain = nlohmann::ordered_json::object();
    for (const auto& [chain, share] : b.share_by_chain) by_chain[chain] = share;
    bridged.push_back({{"token", b.token}, {"share", b.share_all}, {"by_chain", by_chain}});
  }
  return j;
}

}  // namespace restake::flow
