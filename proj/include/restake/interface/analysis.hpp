#pragma once

// Engine calls shared by the CLI and the HTTP service, plus the JSON
// round-trips that let `report` rebuild results written by earlier commands.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/econometrics.hpp"
#include "restake/forest.hpp"
#include "restake/pipeline.hpp"
#include "restake/stress.hpp"

namespace restake::interface {

// ---------------------------------------------------------------------------
// Inputs

struct LoadedFrame {
  pipeline::FeatureFrame frame;
  /// Present when the input was a raw panel.
  std::optional<pipeline::Panel> panel;
};

/// Engineered frames carry a "# input_rows=" provenance line; anything else is a raw panel.
inline bool is_feature_frame_csv(const std::string& text) {
  return text.rfind("# input_rows=", 0) == 0;
}

inline LoadedFrame load_frame_text(const std::string& text, const std::string& origin, bool ffill = false) {
  if (is_feature_frame_csv(text)) return {pipeline::feature_frame_from_csv(text, origin), std::nullopt};
  auto panel = pipeline::align_daily(pipeline::read_panel_csv(text, origin), pipeline::AlignOptions{ffill});
  auto frame = pipeline::engineer_features(panel);
  return {std::move(frame), std::move(panel)};
}

inline LoadedFrame load_frame(const std::filesystem::path& path, bool ffill = false) {
  return load_frame_text(read_file(path), path.string(), ffill);
}

// ---------------------------------------------------------------------------
// Regression

inline constexpr Date kDefaultChowBreak{2024, 4, 30};

struct RegressionOptions {
  /// 1 = same-day, 2 = one-day lag, 3 = two-day lag.
  std::vector<int> models{1, 2, 3};
  bool robust = false;
  double winsor_lower = 0.01;
  double winsor_upper = 0.99;
  Date chow_break = kDefaultChowBreak;
};

struct ModelFit {
  std::string label;
  int lag = 0;
  econ::OlsFit fit;
  std::vector<Date> dates;
};

struct RegressionResult {
  bool robust = false;
  double winsor_lower = 0.01;
  double winsor_upper = 0.99;
  std::vector<ModelFit> models;
  std::vector<std::pair<std::string, double>> vif;
  std::vector<std::pair<std::string, econ::TestResult>> adf;
  Date chow_break = kDefaultChowBreak;
  std::optional<econ::TestResult> chow;
  std::vector<std::string> notes;
};

inline std::vector<int> parse_models(const std::string& s) {
  if (s == "all") return {1, 2, 3};
  if (s == "1" || s == "2" || s == "3") return {s[0] - '0'};
  throw ValidationError("unknown model '" + s + "' (expected 1, 2, 3 or all)");
}

inline RegressionResult run_regression(const pipeline::FeatureFrame& frame, const RegressionOptions& opt = {}) {
  if (opt.models.empty()) throw ValidationError("no models requested");
  RegressionResult r;
  r.robust = opt.robust;
  r.winsor_lower = opt.winsor_lower;
  r.winsor_upper = opt.winsor_upper;
  r.chow_break = opt.chow_break;
  const econ::DesignMatrix base =
      opt.robust ? econ::winsorize_design(frame.design, opt.winsor_lower, opt.winsor_upper) : frame.design;
  const auto cov = opt.robust ? econ::Covariance::HC3 : econ::Covariance::Classical;
  for (int m : opt.models) {
    if (m < 1 || m > 3) throw ValidationError("model must be 1, 2 or 3");
    const auto x = econ::lag_model(base, m - 1);
    r.models.push_back({"Model " + std::to_string(m), m - 1, econ::ols_fit(x, cov), x.dates()});
  }
  r.vif = econ::vif(base);
  auto adf_row = [&](const std::string& label, const std::vector<double>& v) {
    try {
      r.adf.emplace_back(label, econ::adf_test(v));
    } catch (const DegenerateInputError& ex) {
      r.notes.push_back("ADF skipped for " + label + ": " + ex.what());
    }
  };
  adf_row(base.y_name(), base.y());
  for (const auto& c : base.columns())
    if (c.name != "Events") adf_row(c.name, c.values);
  adf_row("Residuals (" + r.models.front().label + ")", r.models.front().fit.residuals);
  try {
    r.chow = econ::chow_test(econ::lag_model(base, r.models.front().lag), opt.chow_break);
  } catch (const InsufficientDataError& ex) {
    r.notes.push_back(std::string("Chow test skipped: ") + ex.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Granger

struct GrangerOptions {
  /// Empty: every feature except the Events dummy.
  std::vector<std::string> causes;
  std::string effect = pipeline::kResponseName;
  int max_lag = 5;
};

struct GrangerEntry {
  std::string cause;
  std::vector<econ::TestResult> scan;
};

struct GrangerResult {
  std::string effect;
  int max_lag = 5;
  std::vector<GrangerEntry> entries;
};

inline const std::vector<double>& frame_series(const pipeline::FeatureFrame& f, const std::string& name) {
  if (name == f.design.y_name()) return f.design.y();
  if (!f.design.has_column(name)) throw ValidationError("unknown series '" + name + "'");
  return f.design.column(name).values;
}

inline GrangerResult run_granger(const pipeline::FeatureFrame& frame, const GrangerOptions& opt = {}) {
  GrangerResult r{opt.effect, opt.max_lag, {}};
  std::vector<std::string> causes = opt.causes;
  if (causes.empty())
    for (const auto& c : frame.design.columns())
      if (c.name != "Events" && c.name != opt.effect) causes.push_back(c.name);
  const auto& effect = frame_series(frame, opt.effect);
  for (const auto& c : causes) {
    if (c == opt.effect) throw ValidationError("cause and effect must differ ('" + c + "')");
    r.entries.push_back({c, econ::granger_scan(frame_series(frame, c), effect, opt.max_lag)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Forest

struct ImportanceOptions {
  forest::ForestConfig config;
  int repeats = 10;
  bool include_events = false;
};

inline forest::ImportanceReport run_importance(const pipeline::FeatureFrame& frame, const ImportanceOptions& opt) {
  if (opt.repeats < 1) throw ValidationError("repeats must be >= 1");
  return forest::importance_report(forest::importance_design(frame.design, opt.include_events), opt.config,
                                   opt.repeats);
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline double num_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline std::vector<double> nums(const nlohmann::json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(num_or_nan(x));
  return v;
}

inline nlohmann::ordered_json dates_json(const std::vector<Date>& d) {
  auto out = nlohmann::ordered_json::array();
  for (auto x : d) out.push_back(x.iso());
  return out;
}

inline std::vector<Date> dates_from(const nlohmann::json& j) {
  std::vector<Date> out;
  for (const auto& x : j) out.push_back(Date::parse(x.get<std::string>()));
  return out;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("malformed ") + what + " JSON: " + ex.what());
  }
}

}  // namespace detail

inline econ::OlsFit ols_fit_from_json(const nlohmann::json& j) {
  return detail::guarded("regression", [&] {
    econ::OlsFit f;
    f.cov = j.at("covariance").get<std::string>() == "HC3" ? econ::Covariance::HC3 : econ::Covariance::Classical;
    f.n = j.at("n").get<std::size_t>();
    f.k = j.at("k").get<std::size_t>();
    for (const auto& c : j.at("coefficients")) {
      f.names.push_back(c.at("name").get<std::string>());
      f.beta.push_back(detail::num_or_nan(c.at("beta")));
      f.se_classical.push_back(detail::num_or_nan(c.at("se_classical")));
      f.se_hc3.push_back(detail::num_or_nan(c.at("se_hc3")));
      f.t_stats.push_back(detail::num_or_nan(c.at("t")));
      f.p_values.push_back(detail::num_or_nan(c.at("p")));
    }
    f.r2 = j.at("r2").get<double>();
    f.adj_r2 = j.at("adj_r2").get<double>();
    f.rss = j.at("rss").get<double>();
    f.sigma2 = j.at("sigma2").get<double>();
    f.residuals = detail::nums(j.at("residuals"));
    f.leverage = detail::nums(j.at("leverage"));
    return f;
  });
}

inline econ::TestResult test_result_from_json(const nlohmann::json& j) {
  return detail::guarded("test result", [&] {
    econ::TestResult r;
    r.test_name = j.at("test").get<std::string>();
    r.statistic = detail::num_or_nan(j.at("statistic"));
    if (!j.at("df_num").is_null()) r.df_num = j.at("df_num").get<double>();
    if (!j.at("df_den").is_null()) r.df_den = j.at("df_den").get<double>();
    r.p_value = j.at("p_value").get<double>();
    if (!j.at("lag").is_null()) r.lag = j.at("lag").get<int>();
    r.nobs = j.at("nobs").get<std::size_t>();
    for (const auto& [level, flag] : j.at("reject_at").items()) r.reject_at.emplace_back(std::stod(level), flag.get<bool>());
    std::sort(r.reject_at.begin(), r.reject_at.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [label, v] : j.at("critical_values").items()) r.critical_values[label] = v.get<double>();
    r.selected = j.at("selected").get<bool>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  });
}

inline nlohmann::ordered_json to_json(const RegressionResult& r) {
  nlohmann::ordered_json j;
  j["robust"] = r.robust;
  j["winsorize"] = r.robust ? nlohmann::ordered_json{{"lower", r.winsor_lower}, {"upper", r.winsor_upper}}
                            : nlohmann::ordered_json(nullptr);
  auto& models = j["models"] = nlohmann::ordered_json::array();
  for (const auto& m : r.models)
    models.push_back({{"label", m.label}, {"lag", m.lag}, {"dates", detail::dates_json(m.dates)},
                      {"fit", econ::to_json(m.fit)}});
  auto& vif = j["vif"] = nlohmann::ordered_json::array();
  for (const auto& [name, v] : r.vif) vif.push_back({{"variable", name}, {"vif", econ::detail::number_or_null(v)}});
  auto& adf = j["adf"] = nlohmann::ordered_json::array();
  for (const auto& [name, t] : r.adf) adf.push_back({{"series", name}, {"result", econ::to_json(t)}});
  j["chow_break"] = r.chow_break.iso();
  j["chow"] = r.chow ? econ::to_json(*r.chow) : nlohmann::ordered_json(nullptr);
  j["notes"] = r.notes;
  return j;
}

inline RegressionResult regression_from_json(const nlohmann::json& j) {
  return detail::guarded("regression", [&] {
    RegressionResult r;
    r.robust = j.at("robust").get<bool>();
    if (r.robust) {
      r.winsor_lower = j.at("winsorize").at("lower").get<double>();
      r.winsor_upper = j.at("winsorize").at("upper").get<double>();
    }
    for (const auto& m : j.at("models"))
      r.models.push_back({m.at("label").get<std::string>(), m.at("lag").get<int>(), ols_fit_from_json(m.at("fit")),
                          detail::dates_from(m.at("dates"))});
    for (const auto& v : j.at("vif")) r.vif.emplace_back(v.at("variable").get<std::string>(), detail::num_or_nan(v.at("vif")));
    for (const auto& a : j.at("adf")) r.adf.emplace_back(a.at("series").get<std::string>(), test_result_from_json(a.at("result")));
    r.chow_break = Date::parse(j.at("chow_break").get<std::string>());
    if (!j.at("chow").is_null()) r.chow = test_result_from_json(j.at("chow"));
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  });
}

inline nlohmann::ordered_json to_json(const GrangerResult& r) {
  nlohmann::ordered_json j;
  j["effect"] = r.effect;
  j["max_lag"] = r.max_lag;
  auto& rows = j["tests"] = nlohmann::ordered_json::array();
  for (const auto& e : r.entries) {
    auto scan = nlohmann::ordered_json::array();
    for (const auto& t : e.scan) scan.push_back(econ::to_json(t));
    const auto& s = econ::selected(e.scan);
    rows.push_back({{"cause", e.cause},
                    {"selected_lag", s.lag ? nlohmann::ordered_json(*s.lag) : nlohmann::ordered_json(nullptr)},
                    {"p_value", s.p_value},
                    {"stars", econ::granger_stars(s.p_value)},
                    {"scan", std::move(scan)}});
  }
  return j;
}

inline GrangerResult granger_from_json(const nlohmann::json& j) {
  return detail::guarded("granger", [&] {
    GrangerResult r{j.at("effect").get<std::string>(), j.at("max_lag").get<int>(), {}};
    for (const auto& t : j.at("tests")) {
      GrangerEntry e{t.at("cause").get<std::string>(), {}};
      for (const auto& s : t.at("scan")) e.scan.push_back(test_result_from_json(s));
      r.entries.push_back(std::move(e));
    }
    return r;
  });
}

inline forest::ImportanceReport importance_from_json(const nlohmann::json& j) {
  return detail::guarded("importance", [&] {
    forest::ImportanceReport r;
    const auto& c = j.at("config");
    r.config.n_trees = c.at("n_trees").get<int>();
    r.config.max_features = forest::parse_max_features(c.at("max_features").get<std::string>());
    r.config.min_leaf = c.at("min_leaf").get<int>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.bootstrap = c.at("bootstrap").get<bool>();
    r.repeats = j.at("repeats").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_train = j.at("n_train").get<std::size_t>();
    r.n_scored = j.at("n_scored").get<std::size_t>();
    r.scoring = j.at("scoring").get<std::string>() == "all-trees" ? forest::Scoring::AllTrees : forest::Scoring::OutOfBag;
    r.oob_mse = detail::num_or_nan(j.at("oob_mse"));
    r.no_splits = j.at("no_splits").get<bool>();
    for (const auto& f : j.at("features")) {
      r.features.push_back(f.at("feature").get<std::string>());
      r.gini.push_back(f.at("gini").get<double>());
      r.permutation.push_back(f.at("permutation").get<double>());
    }
    return r;
  });
}

inline pipeline::SummaryTable summary_from_json(const nlohmann::json& j) {
  return detail::guarded("summary", [&] {
    pipeline::SummaryTable t{j.at("view").get<std::string>(), j.at("first_date").get<std::string>(),
                             j.at("last_date").get<std::string>(), {}};
    for (const auto& r : j.at("rows"))
      t.rows.push_back({r.at("name").get<std::string>(), r.at("n").get<std::size_t>(), r.at("mean").get<double>(),
                        r.at("std").get<double>(), r.at("min").get<double>(), r.at("max").get<double>()});
    return t;
  });
}

inline stress::StressResult stress_result_from_json(const nlohmann::json& j) {
  return detail::guarded("stress result", [&] {
    stress::StressResult r;
    r.debt = j.at("debt").get<double>();
    r.health_factor = j.at("health_factor").get<double>();
    r.critical_depeg = j.at("critical_depeg").get<double>();
    r.liquidatable = j.at("liquidatable").get<bool>();
    r.at_risk_volume = j.at("at_risk_volume").get<double>();
    r.liquidated_volume = j.at("liquidated_volume").get<double>();
    r.local_coverage = j.at("local_coverage").get<double>();
    r.mainnet_coverage = j.at("mainnet_coverage").get<double>();
    r.lsp_unwind = j.at("lsp_unwind").get<double>();
    for (const auto& s : j.at("stages"))
      r.stages.push_back({s.at("name").get<std::string>(), s.at("inflow").get<double>(), s.at("absorbed").get<double>(),
                          s.at("residual").get<double>(), s.at("nodes").get<std::vector<std::string>>()});
    return r;
  });
}

struct SweepPoint {
  double depeg = 0;
  double health_factor = 0;
  bool liquidatable = false;
};

struct SweepResult {
  stress::ScenarioConfig config;
  double critical_depeg = 0;
  std::vector<SweepPoint> points;
};

inline SweepResult run_sweep(const stress::ScenarioConfig& c, double from, double to, int steps) {
  SweepResult r{c, stress::critical_depeg(c.params), {}};
  for (const auto& [d, res] : stress::sweep_depeg(c, stress::linear_grid(from, to, steps)))
    r.points.push_back({d, res.health_factor, res.liquidatable});
  return r;
}

inline nlohmann::ordered_json to_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["config"] = stress::to_json(r.config);
  j["critical_depeg"] = r.critical_depeg;
  auto& pts = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : r.points)
    pts.push_back({{"depeg", p.depeg}, {"health_factor", p.health_factor}, {"liquidatable", p.liquidatable}});
  return j;
}

inline SweepResult sweep_from_json(const nlohmann::json& j) {
  return detail::guarded("sweep", [&] {
    SweepResult r{stress::scenario_from_json(j.at("config")), j.at("critical_depeg").get<double>(), {}};
    for (const auto& p : j.at("points"))
      r.points.push_back({p.at("depeg").get<double>(), p.at("health_factor").get<double>(),
                          p.at("liquidatable").get<bool>()});
    return r;
  });
}

}  // namespace restake::interface
