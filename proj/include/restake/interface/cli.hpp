#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/flowgraph.hpp"
#include "restake/interface/analysis.hpp"
#include "restake/interface/manifest.hpp"
#include "restake/interface/report.hpp"
#include "restake/interface/service.hpp"
#include "restake/pipeline.hpp"
#include "restake/stress.hpp"

#ifndef RESTAKE_SOURCE_DIR
#define RESTAKE_SOURCE_DIR "."
#endif

namespace restake::cli {

namespace fs = std::filesystem;
using interface::Artifacts;
using interface::Format;
using interface::ResultsBundle;
using interface::RunManifest;

inline constexpr int kExitOk = 0;
inline constexpr int kExitEngine = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kDefaultGraph = "fig5_2025-10-04";

inline fs::path default_scenario_path() {
  return fs::path(RESTAKE_SOURCE_DIR) / "scenarios" / "paper_linea_2025-10-04.json";
}

struct Globals {
  std::optional<std::uint64_t> seed;
  bool offline = false;
  std::string out;
  std::optional<std::int64_t> timestamp;
};

/// What a command produced: files for --out and the text for stdout.
struct CommandOutput {
  Artifacts artifacts;
  std::string stdout_text;
};

namespace detail {

inline RunManifest make_manifest(const std::string& command, const Globals& g) {
  RunManifest m;
  m.command = command;
  m.timestamp = interface::manifest_timestamp(g.timestamp);
  if (g.seed) m.seeds["global"] = *g.seed;
  return m;
}

inline std::vector<Format> parse_formats(const std::vector<std::string>& names) {
  std::vector<Format> out;
  for (const auto& n : names) {
    if (n == "all") return {Format::Text, Format::Json, Format::Csv, Format::Svg};
    out.push_back(interface::parse_format(n));
  }
  if (out.empty()) throw ValidationError("no output format requested");
  return out;
}

inline const std::string& primary_text(const Artifacts& a) {
  for (const auto& [name, content] : a)
    if (name.size() > 4 && name.compare(name.size() - 4, 4, ".txt") == 0) return content;
  for (const auto& [name, content] : a)
    if (name.size() > 5 && name.compare(name.size() - 5, 5, ".json") == 0) return content;
  return a.begin()->second;
}

inline CommandOutput finish(Artifacts a) {
  std::string text = primary_text(a);
  return {std::move(a), std::move(text)};
}

inline flow::FlowGraph load_graph_option(const std::string& name, const std::string& file, RunManifest& m) {
  if (!file.empty()) {
    m.add_config(file);
    return flow::load_graph(flow::FixtureFile{file});
  }
  m.parameters["graph"] = name;
  return flow::load_graph(flow::BundledFixture{name});
}

inline stress::ScenarioConfig load_scenario(const std::string& path, RunManifest& m) {
  m.add_config(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& ex) {
    throw DataError("malformed scenario file '" + path + "': " + ex.what());
  }
  return stress::scenario_from_json(j);
}

inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& paths, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.emplace_back(p);
    }
  }
  if (out.empty()) throw ValidationError("no " + ext + " inputs found");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each is a pure function of its options; `run` handles I/O.

struct IngestOptions {
  std::vector<std::string> sources;
  bool ffill = false;
  std::string start;
  std::string end;
  std::string cache_dir;
  int max_parallel = 4;
};

inline CommandOutput cmd_ingest(const IngestOptions& o, const Globals& g) {
  auto m = detail::make_manifest("ingest", g);
  std::vector<pipeline::SourceDescriptor> ds;
  for (const auto& p : detail::expand_inputs(o.sources, ".json")) {
    ds.push_back(pipeline::load_descriptor(p));
    m.add_config(p);
  }
  pipeline::FetchOptions fo;
  fo.offline = g.offline;
  if (!o.cache_dir.empty()) fo.cache_dir = o.cache_dir;
  fo.max_parallel = static_cast<unsigned>(std::max(1, o.max_parallel));
  const auto series = pipeline::fetch_all(ds, fo);
  pipeline::Panel panel;
  if (!o.start.empty() || !o.end.empty()) {
    auto [lo, hi] = pipeline::common_window(series);
    panel = pipeline::align_daily(series, o.start.empty() ? lo : Date::parse(o.start),
                                  o.end.empty() ? hi : Date::parse(o.end), {o.ffill});
  } else {
    panel = pipeline::align_daily(series, {o.ffill});
  }
  m.parameters["ffill"] = o.ffill;
  m.parameters["start"] = panel.dates.front().iso();
  m.parameters["end"] = panel.dates.back().iso();
  nlohmann::ordered_json j;
  j["manifest"] = interface::to_json(m);
  j["manifest_id"] = interface::manifest_id(m);
  auto& arr = j["series"] = nlohmann::ordered_json::array();
  std::string text = interface::detail::manifest_line(m) + "Ingested " + std::to_string(series.size()) +
                     " series, " + std::to_string(panel.rows()) + " aligned days " + panel.dates.front().iso() +
                     " to " + panel.dates.back().iso() + "\n";
  for (const auto& s : series) {
    arr.push_back({{"series_name", s.series_name},
                   {"units", s.units},
                   {"points", s.points.size()},
                   {"retrieved_at", s.retrieved_at}});
    text += "  " + s.series_name + " (" + s.units + "): " + std::to_string(s.points.size()) + " points\n";
  }
  for (const auto& [name, n] : panel.fill_counts)
    if (n > 0) text += "  forward-filled " + std::to_string(n) + " days in " + name + "\n";
  return {{{"panel.csv", pipeline::to_csv(panel)}, {"ingest.json", j.dump(2) + "\n"}, {"ingest.txt", text}}, text};
}

struct InputOptions {
  std::string input;
  bool ffill = false;
};

inline interface::LoadedFrame load_input(const InputOptions& o, RunManifest& m) {
  m.add_input(o.input);
  m.parameters["input"] = o.input;
  if (o.ffill) m.parameters["ffill"] = true;
  return interface::load_frame(o.input, o.ffill);
}

inline CommandOutput cmd_features(const InputOptions& o, const Globals& g) {
  auto m = detail::make_manifest("features", g);
  const auto loaded = load_input(o, m);
  if (!loaded.panel) throw ValidationError("features needs a raw panel CSV, not an engineered frame");
  ResultsBundle b;
  b.manifest = m;
  b.summary_raw = pipeline::summary_stats(*loaded.panel);
  b.summary_engineered = pipeline::summary_stats(loaded.frame);
  auto a = interface::render_report(b, {Format::Text, Format::Json, Format::Csv}, "summary");
  a["features.csv"] = pipeline::to_csv(loaded.frame);
  a["panel.csv"] = pipeline::to_csv(*loaded.panel);
  return detail::finish(std::move(a));
}

struct RegressOptions {
  InputOptions in;
  std::string model = "all";
  bool robust = false;
  double winsor_lower = 0.01;
  double winsor_upper = 0.99;
  std::string chow_break = interface::kDefaultChowBreak.iso();
};

inline CommandOutput cmd_regress(const RegressOptions& o, const Globals& g) {
  auto m = detail::make_manifest("regress", g);
  const auto loaded = load_input(o.in, m);
  interface::RegressionOptions ro;
  ro.models = interface::parse_models(o.model);
  ro.robust = o.robust;
  ro.winsor_lower = o.winsor_lower;
  ro.winsor_upper = o.winsor_upper;
  ro.chow_break = Date::parse(o.chow_break);
  m.parameters["model"] = o.model;
  m.parameters["robust"] = o.robust;
  if (o.robust) m.parameters["winsorize"] = {o.winsor_lower, o.winsor_upper};
  m.parameters["chow_break"] = o.chow_break;
  ResultsBundle b;
  b.manifest = m;
  b.regression = interface::run_regression(loaded.frame, ro);
  return detail::finish(interface::render_report(b, {Format::Text, Format::Json, Format::Csv}, "regression"));
}

struct GrangerCliOptions {
  InputOptions in;
  std::vector<std::string> causes;
  std::string effect = pipeline::kResponseName;
  int max_lag = 5;
};

inline CommandOutput cmd_granger(const GrangerCliOptions& o, const Globals& g) {
  auto m = detail::make_manifest("granger", g);
  const auto loaded = load_input(o.in, m);
  m.parameters["cause"] = o.causes;
  m.parameters["effect"] = o.effect;
  m.parameters["max_lag"] = o.max_lag;
  ResultsBundle b;
  b.manifest = m;
  b.granger = interface::run_granger(loaded.frame, {o.causes, o.effect, o.max_lag});
  return detail::finish(interface::render_report(b, {Format::Text, Format::Json, Format::Csv}, "granger"));
}

struct ForestCliOptions {
  InputOptions in;
  int trees = 500;
  std::string max_features = "p/3";
  int min_leaf = 5;
  int repeats = 10;
  bool include_events = false;
  unsigned threads = 0;
};

inline CommandOutput cmd_forest(const ForestCliOptions& o, const Globals& g) {
  auto m = detail::make_manifest("forest", g);
  const auto loaded = load_input(o.in, m);
  interface::ImportanceOptions io;
  io.config.n_trees = o.trees;
  io.config.max_features = forest::parse_max_features(o.max_features);
  io.config.min_leaf = o.min_leaf;
  io.config.seed = g.seed.value_or(0);
  io.config.threads = o.threads;
  io.config.validate();
  io.repeats = o.repeats;
  io.include_events = o.include_events;
  m.seeds["forest"] = io.config.seed;
  m.parameters["trees"] = o.trees;
  m.parameters["max_features"] = o.max_features;
  m.parameters["min_leaf"] = o.min_leaf;
  m.parameters["repeats"] = o.repeats;
  m.parameters["include_events"] = o.include_events;
  ResultsBundle b;
  b.manifest = m;
  b.importance = interface::run_importance(loaded.frame, io);
  return detail::finish(interface::render_report(b, {Format::Text, Format::Json, Format::Csv}, "importance"));
}

struct StressCliOptions {
  std::string config = default_scenario_path().string();
  std::optional<double> depeg;
  std::string graph = kDefaultGraph;
  std::string graph_file;
  double from = 0.0;
  double to = 0.10;
  int steps = 101;
};

inline CommandOutput cmd_stress_run(const StressCliOptions& o, const Globals& g) {
  auto m = detail::make_manifest("stress run", g);
  auto c = detail::load_scenario(o.config, m);
  if (o.depeg) {
    c.depeg = *o.depeg;
    m.parameters["depeg"] = *o.depeg;
    c.validate();
  }
  const auto graph = detail::load_graph_option(o.graph, o.graph_file, m);
  ResultsBundle b;
  b.manifest = m;
  b.stress = interface::StressRun{c, stress::run_scenario(graph, c)};
  return detail::finish(interface::render_report(b, {Format::Text, Format::Json, Format::Csv}, "stress"));
}

inline CommandOutput cmd_stress_sweep(const StressCliOptions& o, const Globals& g) {
  auto m = detail::make_manifest("stress sweep", g);
  const auto c = detail::load_scenario(o.config, m);
  m.parameters["from"] = o.from;
  m.parameters["to"] = o.to;
  m.parameters["steps"] = o.steps;
  ResultsBundle b;
  b.manifest = m;
  b.sweep = interface::run_sweep(c, o.from, o.to, o.steps);
  return detail::finish(interface::render_report(b, {Format::Text, Format::Json, Format::Csv}, "sweep"));
}

struct GraphCliOptions {
  std::string graph = kDefaultGraph;
  std::string graph_file;
  std::string source;
  std::string sink;
  int max_depth = 6;
};

inline CommandOutput cmd_graph_metrics(const GraphCliOptions& o, const Globals& g) {
  auto m = detail::make_manifest("graph metrics", g);
  const auto graph = detail::load_graph_option(o.graph, o.graph_file, m);
  const auto metrics = flow::compute_metrics(graph);
  nlohmann::ordered_json j;
  j["manifest"] = interface::to_json(m);
  j["metrics"] = flow::to_json(metrics);
  std::string t = interface::detail::manifest_line(m);
  t += "Naive TVL          " + format_fixed(metrics.naive_tvl, 2) + "\n";
  t += "Uninflated TVL     " + format_fixed(metrics.uninflated_tvl, 2) + "\n";
  t += "Restaked fraction  " + format_fixed(metrics.security.restaked_fraction, 4) + " (" +
       format_fixed(metrics.security.restaked_fraction * 100, 2) + "% of staked ETH)\n";
  t += "Finality threshold " + format_fixed(metrics.security.threshold, 4) + "\n";
  t += "Security margin    " + format_fixed(metrics.security.margin, 4) +
       (metrics.security.at_risk ? "  AT RISK\n" : "  not at risk\n");
  for (const auto& b : metrics.bridged) {
    t += "Bridged share of " + b.token + ": " + format_fixed(b.share_all * 100, 2) + "%";
    for (const auto& [chain, s] : b.share_by_chain) t += ", " + chain + " " + format_fixed(s * 100, 2) + "%";
    t += "\n";
  }
  for (const auto& w : graph.warnings()) t += "warning: " + w + "\n";
  return {{{"metrics.json", j.dump(2) + "\n"}, {"metrics.txt", t}}, t};
}

inline CommandOutput cmd_graph_paths(const GraphCliOptions& o, const Globals& g) {
  auto m = detail::make_manifest("graph paths", g);
  const auto graph = detail::load_graph_option(o.graph, o.graph_file, m);
  m.parameters["source"] = o.source;
  m.parameters["sink"] = o.sink;
  m.parameters["max_depth"] = o.max_depth;
  const auto paths = flow::exposure_paths(graph, o.source, o.sink, o.max_depth);
  nlohmann::ordered_json j;
  j["manifest"] = interface::to_json(m);
  auto& arr = j["paths"] = nlohmann::ordered_json::array();
  std::string t = interface::detail::manifest_line(m);
  t += std::to_string(paths.size()) + " paths from " + o.source + " to " + o.sink + " (max depth " +
       std::to_string(o.max_depth) + ")\n";
  for (const auto& p : paths) {
    arr.push_back(flow::to_json(p));
    std::string line;
    for (const auto& n : p.nodes) line += (line.empty() ? "" : " -> ") + n;
    t += "  " + line + "  bottleneck " + (p.bottleneck ? format_fixed(*p.bottleneck, 2) : std::string("-")) + "\n";
  }
  return {{{"paths.json", j.dump(2) + "\n"}, {"paths.txt", t}}, t};
}

struct ReportOptions {
  std::vector<std::string> from;
  std::vector<std::string> formats{"all"};
  std::string tmpl = "pipeline";
  std::string panel;
};

inline CommandOutput cmd_report(const ReportOptions& o, const Globals& g) {
  auto m = detail::make_manifest("report", g);
  m.parameters["template"] = o.tmpl;
  m.parameters["format"] = o.formats;
  ResultsBundle b;
  std::string panel_path = o.panel;
  for (const auto& p : detail::expand_inputs(o.from, ".json")) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(p));
    } catch (const nlohmann::json::parse_error& ex) {
      throw DataError("malformed report JSON '" + p.string() + "': " + ex.what());
    }
    if (!j.is_object() || !j.contains("template")) continue;
    m.add_input(p);
    interface::merge_report_json(b, j);
  }
  if (panel_path.empty())
    for (const auto& f : o.from)
      if (fs::is_directory(f) && fs::exists(fs::path(f) / "panel.csv")) panel_path = (fs::path(f) / "panel.csv").string();
  if (!panel_path.empty()) {
    m.add_input(panel_path);
    b.panel = pipeline::align_daily(pipeline::load_panel_csv(panel_path));
  }
  b.manifest = m;
  return detail::finish(interface::render_report(b, detail::parse_formats(o.formats), o.tmpl));
}

struct ServeOptions {
  std::string bind = interface::default_bind();
  std::string graph = kDefaultGraph;
  std::string graph_file;
  std::string scenario = default_scenario_path().string();
  std::string ui_dir;
  unsigned workers = 4;
  int timeout_ms = 60000;
};

inline std::atomic<interface::Service*>& active_service() {
  static std::atomic<interface::Service*> s{nullptr};
  return s;
}

inline int cmd_serve(const ServeOptions& o, const Globals& g, std::ostream& out) {
  RunManifest m = detail::make_manifest("serve", g);
  interface::ServiceConfig cfg;
  cfg.graph = detail::load_graph_option(o.graph, o.graph_file, m);
  cfg.scenario_defaults = detail::load_scenario(o.scenario, m);
  cfg.ui_dir = o.ui_dir;
  cfg.workers = o.workers;
  cfg.request_timeout = std::chrono::milliseconds(o.timeout_ms);
  interface::Service service(std::move(cfg));
  const auto [host, port] = interface::parse_bind(o.bind);
  const int bound = service.bind(host, port);
  out << "listening on http://" << host << ":" << bound << "\n" << std::flush;
  active_service() = &service;
  std::signal(SIGINT, [](int) {
    if (auto* s = active_service().load()) s->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (auto* s = active_service().load()) s->stop();
  });
  service.listen();
  active_service() = nullptr;
  return kExitOk;
}

// ---------------------------------------------------------------------------

/// Parses argv, runs one subcommand and writes its artifacts. Exit codes:
/// 0 success, 1 engine error, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Restaking risk engine: value-flow graph, liquidation stress tests, econometrics and reports",
               "restake"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", interface::kEngineVersion);

  Globals g;
  std::uint64_t seed = 0;
  std::int64_t timestamp = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Root seed for stochastic steps (forest)");
  auto* offline_flag = app.add_flag("--offline", g.offline, "Never touch the network; ingest reads the cache only")
                           ->envname("RESTAKE_OFFLINE");
  (void)offline_flag;
  app.add_option("--out", g.out, "Directory for artifacts (written atomically)");
  auto* ts_opt = app.add_option("--timestamp", timestamp, "Manifest timestamp, Unix seconds (default SOURCE_DATE_EPOCH or 0)");

  std::function<CommandOutput()> action;
  std::optional<ServeOptions> serve;

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Fetch descriptors (cache-first) and align a daily panel");
  c_ingest->add_option("--sources", ingest.sources, "Descriptor files or directories")->required();
  c_ingest->add_flag("--ffill", ingest.ffill, "Forward-fill gaps instead of failing");
  c_ingest->add_option("--start", ingest.start, "First day (YYYY-MM-DD)");
  c_ingest->add_option("--end", ingest.end, "Last day (YYYY-MM-DD)");
  c_ingest->add_option("--cache-dir", ingest.cache_dir, "Cache root (default RESTAKE_CACHE_DIR or .restake-cache)");
  c_ingest->add_option("--max-parallel", ingest.max_parallel, "Concurrent fetches")->capture_default_str();
  c_ingest->callback([&] { action = [&] { return cmd_ingest(ingest, g); }; });

  auto add_input = [](CLI::App* c, InputOptions& in) {
    c->add_option("--input", in.input, "Raw panel CSV or engineered feature CSV")->required();
    c->add_flag("--ffill", in.ffill, "Forward-fill panel gaps");
  };

  InputOptions features;
  auto* c_features = app.add_subcommand("features", "Engineer the feature frame and summary tables");
  add_input(c_features, features);
  c_features->callback([&] { action = [&] { return cmd_features(features, g); }; });

  RegressOptions regress;
  auto* c_regress = app.add_subcommand("regress", "OLS Models 1-3 with VIF, ADF and Chow diagnostics");
  add_input(c_regress, regress.in);
  c_regress->add_option("--model", regress.model, "1, 2, 3 or all")->capture_default_str();
  c_regress->add_flag("--robust", regress.robust, "Winsorize and use HC3 standard errors");
  c_regress->add_option("--winsor-lower", regress.winsor_lower)->capture_default_str();
  c_regress->add_option("--winsor-upper", regress.winsor_upper)->capture_default_str();
  c_regress->add_option("--chow-break", regress.chow_break, "Break date for the Chow test")->capture_default_str();
  c_regress->callback([&] { action = [&] { return cmd_regress(regress, g); }; });

  GrangerCliOptions granger;
  auto* c_granger = app.add_subcommand("granger", "Granger causality scans, lags 1..max-lag");
  add_input(c_granger, granger.in);
  c_granger->add_option("--cause", granger.causes, "Cause series (repeatable; default all features)");
  c_granger->add_option("--effect", granger.effect)->capture_default_str();
  c_granger->add_option("--max-lag", granger.max_lag)->capture_default_str();
  c_granger->callback([&] { action = [&] { return cmd_granger(granger, g); }; });

  ForestCliOptions forest_o;
  auto* c_forest = app.add_subcommand("forest", "Random-forest Gini and permutation importance");
  add_input(c_forest, forest_o.in);
  c_forest->add_option("--trees", forest_o.trees)->capture_default_str();
  c_forest->add_option("--max-features", forest_o.max_features, "p/3, sqrt or all")->capture_default_str();
  c_forest->add_option("--min-leaf", forest_o.min_leaf)->capture_default_str();
  c_forest->add_option("--repeats", forest_o.repeats, "Permutation repeats")->capture_default_str();
  c_forest->add_flag("--include-events", forest_o.include_events, "Keep the Events dummy");
  c_forest->add_option("--threads", forest_o.threads, "Training threads, 0 = all cores (output is unaffected)");
  c_forest->callback([&] { action = [&] { return cmd_forest(forest_o, g); }; });

  StressCliOptions stress_o;
  double depeg = 0;
  auto* c_stress = app.add_subcommand("stress", "Liquidation stress test");
  c_stress->require_subcommand(1);
  auto* c_stress_run = c_stress->add_subcommand("run", "One scenario");
  c_stress_run->add_option("--config", stress_o.config, "Scenario JSON")->capture_default_str();
  auto* depeg_opt = c_stress_run->add_option("--depeg", depeg, "Override the scenario depeg (fraction)");
  c_stress_run->add_option("--graph", stress_o.graph, "Bundled graph fixture")->capture_default_str();
  c_stress_run->add_option("--graph-file", stress_o.graph_file, "Graph JSON file");
  c_stress_run->callback([&] {
    if (depeg_opt->count()) stress_o.depeg = depeg;
    action = [&] { return cmd_stress_run(stress_o, g); };
  });
  auto* c_stress_sweep = c_stress->add_subcommand("sweep", "Health factor over a depeg grid");
  c_stress_sweep->add_option("--config", stress_o.config, "Scenario JSON")->capture_default_str();
  c_stress_sweep->add_option("--from", stress_o.from)->capture_default_str();
  c_stress_sweep->add_option("--to", stress_o.to)->capture_default_str();
  c_stress_sweep->add_option("--steps", stress_o.steps)->capture_default_str();
  c_stress_sweep->callback([&] { action = [&] { return cmd_stress_sweep(stress_o, g); }; });

  GraphCliOptions graph_o;
  auto* c_graph = app.add_subcommand("graph", "Value-flow graph metrics and exposure paths");
  c_graph->require_subcommand(1);
  auto* c_metrics = c_graph->add_subcommand("metrics", "TVL, bridged shares and security margin");
  auto* c_paths = c_graph->add_subcommand("paths", "Simple exposure paths between two nodes");
  for (auto* c : {c_metrics, c_paths}) {
    c->add_option("--graph", graph_o.graph, "Bundled graph fixture")->capture_default_str();
    c->add_option("--graph-file", graph_o.graph_file, "Graph JSON file");
  }
  c_paths->add_option("--source", graph_o.source)->required();
  c_paths->add_option("--sink", graph_o.sink)->required();
  c_paths->add_option("--max-depth", graph_o.max_depth)->capture_default_str();
  c_metrics->callback([&] { action = [&] { return cmd_graph_metrics(graph_o, g); }; });
  c_paths->callback([&] { action = [&] { return cmd_graph_paths(graph_o, g); }; });

  ServeOptions serve_o;
  auto* c_serve = app.add_subcommand("serve", "HTTP JSON service for the explorer UI");
  c_serve->add_option("--bind", serve_o.bind, "host:port (default RESTAKE_BIND or 127.0.0.1:8080)");
  c_serve->add_option("--graph", serve_o.graph)->capture_default_str();
  c_serve->add_option("--graph-file", serve_o.graph_file);
  c_serve->add_option("--scenario", serve_o.scenario, "Scenario defaults JSON");
  c_serve->add_option("--ui-dir", serve_o.ui_dir, "Static assets of the built explorer UI");
  c_serve->add_option("--workers", serve_o.workers)->capture_default_str();
  c_serve->add_option("--timeout-ms", serve_o.timeout_ms, "Per-request compute limit")->capture_default_str();
  c_serve->callback([&] { serve = serve_o; });

  ReportOptions report_o;
  auto* c_report = app.add_subcommand("report", "Render results from earlier commands");
  c_report->add_option("--from", report_o.from, "Result JSON files or artifact directories")->required();
  c_report->add_option("--format", report_o.formats, "text, json, csv, svg or all (repeatable)")->capture_default_str();
  c_report->add_option("--template", report_o.tmpl, "pipeline, summary, regression, granger, importance, stress, sweep")
      ->capture_default_str();
  c_report->add_option("--panel", report_o.panel, "Raw panel CSV for the figures");
  c_report->callback([&] { action = [&] { return cmd_report(report_o, g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count()) g.seed = seed;
  if (ts_opt->count()) g.timestamp = timestamp;

  try {
    if (serve) return cmd_serve(*serve, g, out);
    const CommandOutput result = action();
    if (!g.out.empty()) interface::write_artifacts(g.out, result.artifacts);
    out << result.stdout_text;
    return kExitOk;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitEngine;
  }
}

}  // namespace restake::cli
