#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/interface/analysis.hpp"
#include "restake/interface/manifest.hpp"
#include "restake/interface/svg.hpp"

namespace restake::interface {

enum class Format { Text, Json, Csv, Svg };

inline const char* to_string(Format f) {
  switch (f) {
    case Format::Text: return "text";
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Svg: return "svg";
  }
  return "?";
}

inline Format parse_format(const std::string& s) {
  if (s == "text" || s == "txt") return Format::Text;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "svg") return Format::Svg;
  throw ValidationError("unknown format '" + s + "' (text, json, csv, svg)");
}

struct StressRun {
  stress::ScenarioConfig config;
  stress::StressResult result;
};

struct ResultsBundle {
  RunManifest manifest;
  std::optional<pipeline::SummaryTable> summary_raw;
  std::optional<pipeline::SummaryTable> summary_engineered;
  std::optional<RegressionResult> regression;
  std::optional<GrangerResult> granger;
  std::optional<forest::ImportanceReport> importance;
  std::optional<StressRun> stress;
  std::optional<SweepResult> sweep;
  /// Raw panel for the time-series figures.
  std::optional<pipeline::Panel> panel;

  bool empty() const {
    return !summary_raw && !summary_engineered && !regression && !granger && !importance && !stress && !sweep &&
           !panel;
  }
};

/// filename -> content
using Artifacts = std::map<std::string, std::string>;

inline const std::vector<std::string>& report_templates() {
  static const std::vector<std::string> names{"pipeline", "summary", "regression", "granger",
                                              "importance", "stress", "sweep"};
  return names;
}

namespace detail {

inline void require_complete(const ResultsBundle& b, const std::string& tmpl) {
  if (b.empty()) throw ValidationError("results bundle is empty");
  std::vector<std::string> missing;
  auto need = [&](bool present, const char* part) {
    if (!present) missing.emplace_back(part);
  };
  if (tmpl == "pipeline") {
    need(b.regression.has_value(), "regression");
    need(b.granger.has_value(), "granger");
    need(b.importance.has_value(), "importance");
  } else if (tmpl == "summary") {
    need(b.summary_raw || b.summary_engineered, "summary");
  } else if (tmpl == "regression") {
    need(b.regression.has_value(), "regression");
  } else if (tmpl == "granger") {
    need(b.granger.has_value(), "granger");
  } else if (tmpl == "importance") {
    need(b.importance.has_value(), "importance");
  } else if (tmpl == "stress") {
    need(b.stress.has_value(), "stress");
  } else if (tmpl == "sweep") {
    need(b.sweep.has_value(), "sweep");
  } else {
    throw ValidationError("unknown report template '" + tmpl + "'");
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("results bundle is incomplete for template '" + tmpl + "': missing " + list);
  }
}

inline std::string manifest_line(const RunManifest& m) { return "# manifest " + to_json(m).dump() + "\n"; }

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_num(double v) { return std::isfinite(v) ? format_double(v) : ""; }

inline std::string regression_heading(const RegressionResult& r) {
  if (!r.robust) return "OLS regression, dependent variable: Revenue";
  return "Robustness: winsorized at " + format_fixed(r.winsor_lower * 100, 0) + "%/" +
         format_fixed(r.winsor_upper * 100, 0) + "%, HC3 standard errors, dependent variable: Revenue";
}

inline std::string text_report(const ResultsBundle& b) {
  std::string out = manifest_line(b.manifest);
  auto section = [&](const std::string& title, const std::string& body) {
    out += "\n" + title + "\n" + std::string(title.size(), '=') + "\n" + body;
  };
  if (b.summary_raw) section("Summary statistics (raw)", pipeline::render_table(*b.summary_raw));
  if (b.summary_engineered) section("Summary statistics (engineered)", pipeline::render_table(*b.summary_engineered));
  if (b.regression) {
    const auto& r = *b.regression;
    std::vector<std::pair<std::string, econ::OlsFit>> fits;
    for (const auto& m : r.models) fits.emplace_back(m.label, m.fit);
    section(regression_heading(r), econ::regression_table(fits));
    section("Variance inflation factors", econ::vif_table(r.vif));
    section("Stationarity (ADF, constant)", econ::test_table(r.adf));
    if (r.chow) section("Structural break (Chow, " + r.chow_break.iso() + ")", econ::test_table({{"Model 1", *r.chow}}));
    if (!r.notes.empty()) {
      std::string notes;
      for (const auto& n : r.notes) notes += "- " + n + "\n";
      section("Notes", notes);
    }
  }
  if (b.granger) {
    const auto& g = *b.granger;
    std::vector<econ::GrangerRow> rows;
    for (const auto& e : g.entries) rows.push_back({e.cause, econ::selected(e.scan)});
    section("Granger causality, effect: " + g.effect + ", lags 1-" + std::to_string(g.max_lag),
            econ::granger_table(rows));
  }
  if (b.importance) section("Feature importance (random forest)", forest::render_table(*b.importance));
  if (b.stress) out += "\n" + stress::render_text(b.stress->config, b.stress->result);
  if (b.sweep) {
    std::vector<std::vector<std::string>> grid{{"Depeg", "Health factor", "Liquidatable"}};
    for (const auto& p : b.sweep->points)
      grid.push_back({format_fixed(p.depeg * 100, 2) + "%", format_fixed(p.health_factor, 4),
                      p.liquidatable ? "yes" : "no"});
    section("Health factor sweep, critical depeg " + format_fixed(b.sweep->critical_depeg * 100, 2) + "%",
            econ::detail::render_grid(grid));
  }
  return out;
}

inline nlohmann::ordered_json json_report(const ResultsBundle& b, const std::string& tmpl) {
  nlohmann::ordered_json j;
  j["template"] = tmpl;
  j["manifest"] = to_json(b.manifest);
  j["manifest_id"] = manifest_id(b.manifest);
  auto reparse = [](const nlohmann::json& v) { return nlohmann::ordered_json::parse(v.dump()); };
  if (b.summary_raw) j["summary_raw"] = reparse(pipeline::to_json(*b.summary_raw));
  if (b.summary_engineered) j["summary_engineered"] = reparse(pipeline::to_json(*b.summary_engineered));
  if (b.regression) j["regression"] = to_json(*b.regression);
  if (b.granger) j["granger"] = to_json(*b.granger);
  if (b.importance) j["importance"] = forest::to_json(*b.importance);
  if (b.stress) j["stress"] = {{"config", stress::to_json(b.stress->config)}, {"result", stress::to_json(b.stress->result)}};
  if (b.sweep) j["sweep"] = to_json(*b.sweep);
  return j;
}

inline Artifacts csv_report(const ResultsBundle& b) {
  Artifacts out;
  const std::string head = manifest_line(b.manifest);
  auto put = [&](const std::string& name, const std::string& body) { out[name + ".csv"] = head + body; };
  if (b.summary_raw) put("summary_raw", pipeline::to_csv(*b.summary_raw));
  if (b.summary_engineered) put("summary_engineered", pipeline::to_csv(*b.summary_engineered));
  if (b.regression) {
    std::string s = "model,lag,covariance,parameter,beta,se,t,p,stars,n,r2,adj_r2\n";
    for (const auto& m : b.regression->models) {
      const auto& f = m.fit;
      for (std::size_t i = 0; i < f.names.size(); ++i) {
        const double se = f.cov == econ::Covariance::HC3 ? f.se_hc3[i] : f.se_classical[i];
        s += m.label + "," + std::to_string(m.lag) + "," + econ::to_string(f.cov) + "," + csv_cell(f.names[i]) + "," +
             csv_num(f.beta[i]) + "," + csv_num(se) + "," + csv_num(f.t_stats[i]) + "," + csv_num(f.p_values[i]) +
             "," + econ::regression_stars(f.p_values[i]) + "," + std::to_string(f.n) + "," + csv_num(f.r2) + "," +
             csv_num(f.adj_r2) + "\n";
      }
    }
    put("regression", s);
    std::string v = "variable,vif\n";
    for (const auto& [name, x] : b.regression->vif) v += name + "," + csv_num(x) + "\n";
    put("vif", v);
    std::string t = "series,test,statistic,lag,p_value,nobs\n";
    auto row = [&](const std::string& label, const econ::TestResult& r) {
      t += csv_cell(label) + "," + r.test_name + "," + csv_num(r.statistic) + "," +
           (r.lag ? std::to_string(*r.lag) : "") + "," + csv_num(r.p_value) + "," + std::to_string(r.nobs) + "\n";
    };
    for (const auto& [label, r] : b.regression->adf) row(label, r);
    if (b.regression->chow) row("Chow " + b.regression->chow_break.iso(), *b.regression->chow);
    put("tests", t);
  }
  if (b.granger) {
    std::string s = "cause,effect,lag,f,df_num,df_den,p_value,selected\n";
    for (const auto& e : b.granger->entries)
      for (const auto& r : e.scan)
        s += e.cause + "," + b.granger->effect + "," + (r.lag ? std::to_string(*r.lag) : "") + "," +
             csv_num(r.statistic) + "," + (r.df_num ? csv_num(*r.df_num) : "") + "," +
             (r.df_den ? csv_num(*r.df_den) : "") + "," + csv_num(r.p_value) + "," + (r.selected ? "1" : "0") + "\n";
    put("granger", s);
  }
  if (b.importance) {
    std::string s = "feature,gini,permutation\n";
    for (std::size_t i = 0; i < b.importance->features.size(); ++i)
      s += b.importance->features[i] + "," + csv_num(b.importance->gini[i]) + "," +
           csv_num(b.importance->permutation[i]) + "\n";
    put("importance", s);
  }
  if (b.stress) {
    const auto& r = b.stress->result;
    std::string s = "metric,value\n";
    s += "debt," + csv_num(r.debt) + "\nhealth_factor," + csv_num(r.health_factor) + "\ncritical_depeg," +
         csv_num(r.critical_depeg) + "\nliquidatable," + (r.liquidatable ? "1" : "0") + "\nliquidated_volume," +
         csv_num(r.liquidated_volume) + "\nlocal_coverage," + csv_num(r.local_coverage) + "\nmainnet_coverage," +
         csv_num(r.mainnet_coverage) + "\nlsp_unwind," + csv_num(r.lsp_unwind) + "\n";
    put("stress", s);
  }
  if (b.sweep) {
    std::string s = "depeg,health_factor,liquidatable\n";
    for (const auto& p : b.sweep->points)
      s += csv_num(p.depeg) + "," + csv_num(p.health_factor) + "," + (p.liquidatable ? "1" : "0") + "\n";
    put("sweep", s);
  }
  return out;
}

inline std::vector<Date> events_list() {
  const auto& e = pipeline::event_dates();
  return {e.begin(), e.end()};
}

inline Artifacts svg_report(const ResultsBundle& b) {
  Artifacts out;
  const std::string meta = to_json(b.manifest).dump();
  if (b.panel) {
    const auto& p = *b.panel;
    auto series = [&](const std::string& name, const std::vector<double>& v) { return PlotSeries{name, p.dates, v}; };
    const auto events = events_list();
    if (p.has(pipeline::raw::kTvlRenzoEthereum)) {
      PlotSpec tvl{"TVL in Renzo Protocol", "USD", {series("Ethereum", p.at(pipeline::raw::kTvlRenzoEthereum))}, events};
      if (!pipeline::detail::l2_components(p).empty() || p.has(pipeline::raw::kTvlRenzoL2))
        tvl.series.push_back(series("Layer 2", pipeline::l2_aggregate(p)));
      out["fig_tvl.svg"] = render_svg(tvl, meta);
    }
    if (p.has(pipeline::raw::kRevenue))
      out["fig_revenue.svg"] =
          render_svg({"Revenue of Renzo Protocol", "USD", {series("Revenue", p.at(pipeline::raw::kRevenue))}, events},
                     meta);
    if (p.has(pipeline::raw::kEthPrice) && p.has(pipeline::raw::kEzethPrice))
      out["fig_prices.svg"] = render_svg({"ETH and ezETH price",
                                          "USD",
                                          {series("ETH", p.at(pipeline::raw::kEthPrice)),
                                           series("ezETH", p.at(pipeline::raw::kEzethPrice))},
                                          events},
                                         meta);
    if (p.has(pipeline::raw::kStethApy))
      out["fig_steth_apy.svg"] =
          render_svg({"stETH APY", "percent", {series("stETH APY", p.at(pipeline::raw::kStethApy))}, events}, meta);
  }
  if (b.regression && !b.regression->models.empty()) {
    const auto& m = b.regression->models.front();
    out["fig_residuals.svg"] =
        render_svg({"Regression residuals over time (" + m.label + ")", "log USD", {{"Residuals", m.dates, m.fit.residuals}},
                    events_list()},
                   meta);
  }
  if (out.empty()) throw ValidationError("svg output needs a panel or regression results");
  return out;
}

}  // namespace detail

/// Renders one template in one format. Throws before producing anything when
/// the bundle is empty, incomplete or the template is unknown.
inline Artifacts render_report(const ResultsBundle& b, Format format, const std::string& tmpl = "pipeline") {
  detail::require_complete(b, tmpl);
  switch (format) {
    case Format::Text: return {{tmpl + ".txt", detail::text_report(b)}};
    case Format::Json: return {{tmpl + ".json", detail::json_report(b, tmpl).dump(2) + "\n"}};
    case Format::Csv: return detail::csv_report(b);
    case Format::Svg: return detail::svg_report(b);
  }
  throw ValidationError("unknown format");
}

inline Artifacts render_report(const ResultsBundle& b, const std::vector<Format>& formats,
                               const std::string& tmpl = "pipeline") {
  Artifacts out;
  for (auto f : formats) out.merge(render_report(b, f, tmpl));
  return out;
}

/// Writes every artifact or none. Files are staged in a sibling directory and
/// renamed into place; a fresh `dir` is created by a single rename.
inline void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts) {
  namespace fs = std::filesystem;
  if (artifacts.empty()) throw ValidationError("no artifacts to write");
  for (const auto& [name, _] : artifacts)
    if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos)
      throw ValidationError("invalid artifact name '" + name + "'");
  const fs::path target = dir.empty() ? fs::path(".") : dir;
  const fs::path parent = fs::absolute(target).parent_path();
  fs::create_directories(parent);
  fs::path staging = parent / ("." + fs::absolute(target).filename().string() + ".staging." + std::to_string(::getpid()));
  std::error_code ec;
  fs::remove_all(staging, ec);
  try {
    fs::create_directories(staging);
    for (const auto& [name, content] : artifacts) write_file_atomic(staging / name, content);
    if (!fs::exists(target)) {
      fs::rename(staging, target);
      return;
    }
    for (const auto& [name, _] : artifacts) fs::rename(staging / name, target / name);
    fs::remove_all(staging);
  } catch (const fs::filesystem_error& ex) {
    fs::remove_all(staging, ec);
    throw Error(std::string("cannot write artifacts: ") + ex.what());
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

/// Rebuilds a bundle from JSON reports written earlier; later documents win per section.
inline void merge_report_json(ResultsBundle& b, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("template")) throw DataError("not a report JSON document");
  if (j.contains("summary_raw")) b.summary_raw = summary_from_json(j.at("summary_raw"));
  if (j.contains("summary_engineered")) b.summary_engineered = summary_from_json(j.at("summary_engineered"));
  if (j.contains("regression")) b.regression = regression_from_json(j.at("regression"));
  if (j.contains("granger")) b.granger = granger_from_json(j.at("granger"));
  if (j.contains("importance")) b.importance = importance_from_json(j.at("importance"));
  if (j.contains("stress"))
    b.stress = StressRun{stress::scenario_from_json(j.at("stress").at("config")),
                         stress_result_from_json(j.at("stress").at("result"))};
  if (j.contains("sweep")) b.sweep = sweep_from_json(j.at("sweep"));
}

}  // namespace restake::interface
