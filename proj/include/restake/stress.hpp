#pragma once

// Liquidation stress test for a depegging collateral token on an Aave-style
// lending market, and the staged cascade that follows a liquidation:
// local DEX -> bridge back -> mainnet pools -> liquid-staking redemption.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/flowgraph.hpp"

namespace restake::stress {

struct LendingParams {
  double ltv = 0;  ///< maximum borrow ratio
  double lt = 0;   ///< liquidation threshold

  /// 0 < ltv < lt < 1; anything else leaves no positive critical depeg.
  void validate() const {
    if (!std::isfinite(ltv) || !std::isfinite(lt) || !(ltv > 0) || !(lt < 1) || !(ltv < lt))
      throw ValidationError("lending params require 0 < ltv < lt < 1 (got ltv=" +
                            format_double(ltv) + ", lt=" + format_double(lt) + ")");
  }
};

struct ScenarioConfig {
  LendingParams params;
  double collateral = 0;
  double depeg = 0;
  double local_dex_liquidity = 0;
  double mainnet_liquidity = 0;
  double lsp_stake = 0;
  bool assume_max_ltv = true;
  /// Outstanding debt when assume_max_ltv is false.
  std::optional<double> debt;
  /// Chain hosting the lending market; used to label cascade stages with graph nodes.
  std::string chain = "linea";

  void validate() const {
    params.validate();
    auto amount = [](double v, const char* name) {
      if (!std::isfinite(v) || v < 0)
        throw ValidationError(std::string(name) + " must be finite and non-negative");
    };
    amount(collateral, "collateral");
    amount(local_dex_liquidity, "local_dex_liquidity");
    amount(mainnet_liquidity, "mainnet_liquidity");
    if (!std::isfinite(lsp_stake) || !(lsp_stake > 0))
      throw ValidationError("lsp_stake must be positive");
    if (!std::isfinite(depeg) || depeg < 0 || depeg >= 1)
      throw ValidationError("depeg must lie in [0, 1)");
    if (!assume_max_ltv) {
      if (!debt) throw ValidationError("debt is required when assume_max_ltv is false");
      if (!std::isfinite(*debt) || !(*debt > 0)) throw ValidationError("debt must be positive");
    }
  }
};

struct StageRecord {
  std::string name;
  double inflow = 0;
  double absorbed = 0;
  double residual = 0;
  std::vector<std::string> nodes;
};

struct StressResult {
  double debt = 0;
  double health_factor = 0;
  double critical_depeg = 0;
  bool liquidatable = false;
  double at_risk_volume = 0;
  double liquidated_volume = 0;
  double local_coverage = 0;
  double mainnet_coverage = 0;
  double lsp_unwind = 0;
  std::vector<StageRecord> stages;
};

inline double max_debt(double collateral, double ltv) {
  if (!std::isfinite(collateral) || collateral < 0)
    throw ValidationError("collateral must be non-negative");
  if (!(ltv > 0 && ltv < 1)) throw ValidationError("ltv must lie in (0, 1)");
  return ltv * collateral;
}

/// HF(d) = (1 - d) * LT / LTV for a position opened at maximum LTV.
inline double health_factor(double depeg, const LendingParams& params) {
  params.validate();
  if (!(depeg >= 0 && depeg <= 1)) throw ValidationError("depeg must lie in [0, 1]");
  return (1.0 - depeg) * params.lt / params.ltv;
}

/// Depeg at which HF reaches exactly 1: 1 - LTV / LT.
inline double critical_depeg(const LendingParams& params) {
  params.validate();
  return 1.0 - params.ltv / params.lt;
}

/// liquidity / liquidated; not clamped, so > 1 means surplus liquidity.
inline double coverage_ratio(double liquidity, double liquidated) {
  if (!std::isfinite(liquidity) || liquidity < 0)
    throw ValidationError("liquidity must be non-negative");
  if (!(liquidated > 0)) throw UndefinedRatioError("coverage ratio with zero liquidated volume");
  return liquidity / liquidated;
}

namespace detail {
inline std::vector<std::string> nodes_where(const flow::FlowGraph& g, flow::NodeKind kind,
                                            const std::string& chain) {
  std::vector<std::string> ids;
  for (const auto& n : g.nodes())
    if (n.kind == kind && (chain.empty() || n.chain == chain)) ids.push_back(n.id);
  return ids;
}
}  // namespace detail

/// Ratios use the worst-case at-risk volume (the full posted collateral), so
/// they are defined whether or not the shock triggers liquidation.
inline StressResult run_scenario(const flow::FlowGraph& graph, const ScenarioConfig& config) {
  config.validate();
  const auto& p = config.params;
  StressResult r;
  r.critical_depeg = critical_depeg(p);
  if (config.assume_max_ltv) {
    r.debt = max_debt(config.collateral, p.ltv);
    r.health_factor = health_factor(config.depeg, p);
  } else {
    r.debt = *config.debt;
    r.health_factor = (1.0 - config.depeg) * config.collateral * p.lt / r.debt;
  }
  r.liquidatable = r.health_factor < 1.0;
  r.at_risk_volume = config.collateral;
  r.liquidated_volume = r.liquidatable ? config.collateral : 0.0;

  r.local_coverage = coverage_ratio(config.local_dex_liquidity, r.at_risk_volume);
  r.mainnet_coverage = coverage_ratio(config.mainnet_liquidity, r.at_risk_volume);
  r.lsp_unwind = r.at_risk_volume / config.lsp_stake;

  auto stage = [&](std::string name, double inflow, double capacity,
                   std::vector<std::string> nodes) {
    StageRecord s{std::move(name), inflow, std::min(inflow, capacity), 0, std::move(nodes)};
    s.residual = s.inflow - s.absorbed;
    r.stages.push_back(std::move(s));
    return r.stages.back().residual;
  };
  using flow::NodeKind;
  double flowing = r.liquidated_volume;
  flowing = stage("local_dex", flowing, config.local_dex_liquidity,
                  detail::nodes_where(graph, NodeKind::DexPool, config.chain));
  flowing = stage("bridge_back", flowing, 0.0,
                  detail::nodes_where(graph, NodeKind::BridgeContract, config.chain));
  flowing = stage("mainnet_pools", flowing, config.mainnet_liquidity,
                  detail::nodes_where(graph, NodeKind::DexPool, "ethereum"));
  stage("lsp_redemption", flowing, config.lsp_stake,
        detail::nodes_where(graph, NodeKind::LiquidStakingProtocol, ""));
  return r;
}

inline StressResult run_scenario(const ScenarioConfig& config) {
  return run_scenario(flow::FlowGraph{}, config);
}

/// Runs the scenario at each grid depeg. The grid must be strictly ascending in [0, 1).
inline std::vector<std::pair<double, StressResult>> sweep_depeg(const flow::FlowGraph& graph,
                                                                const ScenarioConfig& config,
                                                                const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0 && grid[i] < 1)) throw ValidationError("sweep grid values must lie in [0, 1)");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ValidationError("sweep grid must be sorted strictly ascending");
  }
  std::vector<std::pair<double, StressResult>> out;
  out.reserve(grid.size());
  for (double d : grid) {
    ScenarioConfig c = config;
    c.depeg = d;
    out.emplace_back(d, run_scenario(graph, c));
  }
  return out;
}

inline std::vector<std::pair<double, StressResult>> sweep_depeg(const ScenarioConfig& config,
                                                                const std::vector<double>& grid) {
  return sweep_depeg(flow::FlowGraph{}, config, grid);
}

/// `steps` evenly spaced points on [from, to] (inclusive).
inline std::vector<double> linear_grid(double from, double to, int steps) {
  if (steps < 1) throw ValidationError("steps must be >= 1");
  if (!(from >= 0 && to < 1 && from <= to)) throw ValidationError("grid bounds must satisfy 0 <= from <= to < 1");
  if (steps == 1) return {from};
  if (from == to) throw ValidationError("grid with several steps needs from < to");
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) grid[static_cast<std::size_t>(i)] = from + (to - from) * i / (steps - 1);
  return grid;
}

/// Inputs for the scenario read off a value-flow graph: collateral in the
/// chain's lending pools, DEX liquidity on that chain and on mainnet, and the
/// largest liquid-staking pool.
inline ScenarioConfig scenario_from_graph(const flow::FlowGraph& g, const std::string& chain,
                                          LendingParams params, double depeg) {
  ScenarioConfig c;
  c.params = params;
  c.depeg = depeg;
  c.chain = chain;
  for (const auto& n : g.nodes()) {
    if (n.kind == flow::NodeKind::LendingPool && n.chain == chain) c.collateral += n.balance;
    if (n.kind == flow::NodeKind::DexPool && n.chain == chain) c.local_dex_liquidity += n.balance;
    if (n.kind == flow::NodeKind::DexPool && n.chain == "ethereum") c.mainnet_liquidity += n.balance;
    if (n.kind == flow::NodeKind::LiquidStakingProtocol) c.lsp_stake = std::max(c.lsp_stake, n.balance);
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scenario config must be a JSON object");
  try {
    ScenarioConfig c;
    c.params.ltv = j.at("ltv").get<double>();
    c.params.lt = j.at("lt").get<double>();
    c.collateral = j.at("collateral").get<double>();
    c.depeg = j.value("depeg", 0.0);
    c.local_dex_liquidity = j.at("local_dex_liquidity").get<double>();
    c.mainnet_liquidity = j.at("mainnet_liquidity").get<double>();
    c.lsp_stake = j.at("lsp_stake").get<double>();
    c.assume_max_ltv = j.value("assume_max_ltv", true);
    if (j.contains("debt") && !j.at("debt").is_null()) c.debt = j.at("debt").get<double>();
    c.chain = j.value("chain", std::string("linea"));
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed scenario config: ") + ex.what());
  }
}

inline nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["ltv"] = c.params.ltv;
  j["lt"] = c.params.lt;
  j["collateral"] = c.collateral;
  j["depeg"] = c.depeg;
  j["local_dex_liquidity"] = c.local_dex_liquidity;
  j["mainnet_liquidity"] = c.mainnet_liquidity;
  j["lsp_stake"] = c.lsp_stake;
  j["assume_max_ltv"] = c.assume_max_ltv;
  j["debt"] = c.debt ? nlohmann::ordered_json(*c.debt) : nlohmann::ordered_json(nullptr);
  j["chain"] = c.chain;
  return j;
}

inline nlohmann::ordered_json to_json(const StressResult& r) {
  nlohmann::ordered_json j;
  j["debt"] = r.debt;
  j["health_factor"] = r.health_factor;
  j["critical_depeg"] = r.critical_depeg;
  j["liquidatable"] = r.liquidatable;
  j["at_risk_volume"] = r.at_risk_volume;
  j["liquidated_volume"] = r.liquidated_volume;
  j["local_coverage"] = r.local_coverage;
  j["mainnet_coverage"] = r.mainnet_coverage;
  j["lsp_unwind"] = r.lsp_unwind;
  auto& stages = j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name},
                      {"inflow", s.inflow},
                      {"absorbed", s.absorbed},
                      {"residual", s.residual},
                      {"nodes", s.nodes}});
  }
  return j;
}

/// Ratio rendered the way the liquidation analysis reports it: "0.0023 (0.23%)".
inline std::string ratio_text(double ratio) {
  return format_fixed(ratio, 4) + " (" + format_fixed(ratio * 100.0, 2) + "%)";
}

inline std::string render_text(const ScenarioConfig& c, const StressResult& r) {
  std::string out;
  auto line = [&](const std::string& label, const std::string& value) {
    std::string l = label;
    if (l.size() < 28) l.append(28 - l.size(), ' ');
    out += l + value + "\n";
  };
  out += "Liquidation stress test\n";
  out += "=======================\n";
  line("LTV / LT", format_fixed(c.params.ltv * 100, 2) + "% / " + format_fixed(c.params.lt * 100, 2) + "%");
  line("Collateral", format_fixed(c.collateral, 2));
  line("Debt", format_fixed(r.debt, 2));
  line("Depeg", format_fixed(c.depeg * 100, 2) + "%");
  line("Health factor", format_fixed(r.health_factor, 4));
  line("Critical depeg (delta*)", ratio_text(r.critical_depeg));
  line("Liquidatable (HF < 1)", r.liquidatable ? "yes" : "no");
  line("Liquidated volume", format_fixed(r.liquidated_volume, 2));
  line("Local coverage", ratio_text(r.local_coverage));
  line("Mainnet coverage", ratio_text(r.mainnet_coverage));
  line("LSP unwind", ratio_text(r.lsp_unwind));
  out += "\nCascade stages\n";
  out += "stage            inflow          absorbed        residual\n";
  for (const auto& s : r.stages) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %-15s %-15s %s\n", s.name.c_str(),
                  format_fixed(s.inflow, 2).c_str(), format_fixed(s.absorbed, 2).c_str(),
                  format_fixed(s.residual, 2).c_str());
    out += buf;
  }
  return out;
}

}  // namespace restake::stress
