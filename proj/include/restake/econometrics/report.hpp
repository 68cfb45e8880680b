#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "restake/core/io.hpp"
#include "restake/econometrics/ols.hpp"
#include "restake/econometrics/test_result.hpp"

namespace restake::econ {

/// Regression tables: "˙" p < 0.10, "*" p < 0.05, "**" p < 0.01, "***" p < 0.001.
inline std::string regression_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.10) return "˙";
  return "";
}

/// Causality tables: "***" p < 0.01, "**" p < 0.05, "*" p < 0.10.
inline std::string granger_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

inline constexpr const char* kRegressionLegend =
    "Significance levels: ˙ p < 0.10, * p < 0.05, ** p < 0.01, *** p < 0.001";
inline constexpr const char* kGrangerLegend = "Significance levels: *** p < 0.01, ** p < 0.05, * p < 0.10";

namespace detail {

inline nlohmann::ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::ordered_json numbers(const std::vector<double>& v) {
  auto out = nlohmann::ordered_json::array();
  for (double x : v) out.push_back(number_or_null(x));
  return out;
}

/// Display width in code points, so "˙" counts as one column.
inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
  const auto w = display_width(s);
  return w >= width ? s : std::string(width - w, ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
  const auto w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

/// Column-aligned text grid: first column left-aligned, the rest right-aligned.
inline std::string render_grid(const std::vector<std::vector<std::string>>& rows,
                               const std::vector<std::size_t>& rules_after = {1}) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    if (widths.size() < r.size()) widths.resize(r.size(), 0);
    for (std::size_t j = 0; j < r.size(); ++j) widths[j] = std::max(widths[j], display_width(r[j]));
  }
  std::size_t total = 0;
  for (auto w : widths) total += w;
  total += widths.empty() ? 0 : 2 * (widths.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (j > 0) line += "  ";
      line += j == 0 ? pad_right(rows[i][j], widths[j]) : pad_left(rows[i][j], widths[j]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (std::find(rules_after.begin(), rules_after.end(), i + 1) != rules_after.end())
      out += std::string(total, '-') + "\n";
  }
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const OlsFit& f) {
  nlohmann::ordered_json j;
  j["covariance"] = to_string(f.cov);
  j["n"] = f.n;
  j["k"] = f.k;
  auto coefs = nlohmann::ordered_json::array();
  const auto& se = f.cov == Covariance::HC3 ? f.se_hc3 : f.se_classical;
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    coefs.push_back({{"name", f.names[i]},
                     {"beta", detail::number_or_null(f.beta[i])},
                     {"se", detail::number_or_null(se[i])},
                     {"se_classical", detail::number_or_null(f.se_classical[i])},
                     {"se_hc3", detail::number_or_null(f.se_hc3[i])},
                     {"t", detail::number_or_null(f.t_stats[i])},
                     {"p", detail::number_or_null(f.p_values[i])},
                     {"stars", regression_stars(f.p_values[i])}});
  }
  j["coefficients"] = std::move(coefs);
  j["r2"] = f.r2;
  j["adj_r2"] = f.adj_r2;
  j["rss"] = f.rss;
  j["sigma2"] = f.sigma2;
  j["residuals"] = detail::numbers(f.residuals);
  j["leverage"] = detail::numbers(f.leverage);
  return j;
}

inline nlohmann::ordered_json to_json(const TestResult& r) {
  nlohmann::ordered_json j;
  j["test"] = r.test_name;
  j["statistic"] = detail::number_or_null(r.statistic);
  j["df_num"] = r.df_num ? nlohmann::ordered_json(*r.df_num) : nlohmann::ordered_json(nullptr);
  j["df_den"] = r.df_den ? nlohmann::ordered_json(*r.df_den) : nlohmann::ordered_json(nullptr);
  j["p_value"] = r.p_value;
  j["lag"] = r.lag ? nlohmann::ordered_json(*r.lag) : nlohmann::ordered_json(nullptr);
  j["nobs"] = r.nobs;
  auto rej = nlohmann::ordered_json::object();
  for (const auto& [level, flag] : r.reject_at) rej[format_double(level)] = flag;
  j["reject_at"] = std::move(rej);
  auto cv = nlohmann::ordered_json::object();
  for (const auto& [label, v] : r.critical_values) cv[label] = v;
  j["critical_values"] = std::move(cv);
  j["selected"] = r.selected;
  j["notes"] = r.notes;
  return j;
}

/// "0.98*** (0.21)"
inline std::string coefficient_cell(double beta, double se, double p, int decimals = 2) {
  std::string se_text = std::isfinite(se) ? format_fixed(se, decimals) : "NA";
  return format_fixed(beta, decimals) + regression_stars(p) + " (" + se_text + ")";
}

/// Side-by-side model table: one row per parameter (union, in first-seen
/// order), then Observations, R-squared, Adj. R-squared and the legend line.
inline std::string regression_table(const std::vector<std::pair<std::string, OlsFit>>& models,
                                    int decimals = 2) {
  std::vector<std::string> params;
  for (const auto& [_, f] : models)
    for (const auto& name : f.names)
      if (std::find(params.begin(), params.end(), name) == params.end()) params.push_back(name);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  for (const auto& [label, _] : models) header.push_back(label);
  rows.push_back(header);
  for (const auto& name : params) {
    std::vector<std::string> row{name};
    for (const auto& [_, f] : models) {
      auto it = std::find(f.names.begin(), f.names.end(), name);
      if (it == f.names.end()) {
        row.emplace_back("");
        continue;
      }
      const auto i = static_cast<std::size_t>(it - f.names.begin());
      const double se = f.cov == Covariance::HC3 ? f.se_hc3[i] : f.se_classical[i];
      row.push_back(coefficient_cell(f.beta[i], se, f.p_values[i], decimals));
    }
    rows.push_back(row);
  }
  std::vector<std::string> obs{"Observations"}, r2{"R-squared"}, adj{"Adj. R-squared"};
  for (const auto& [_, f] : models) {
    obs.push_back(std::to_string(f.n));
    r2.push_back(format_fixed(f.r2, 3));
    adj.push_back(format_fixed(f.adj_r2, 3));
  }
  const std::size_t body = rows.size();
  rows.push_back(obs);
  rows.push_back(r2);
  rows.push_back(adj);
  return detail::render_grid(rows, {1, body}) + kRegressionLegend + "\n";
}

/// Two-column "Variable  VIF" table sorted by VIF descending.
inline std::string vif_table(std::vector<std::pair<std::string, double>> vifs) {
  std::stable_sort(vifs.begin(), vifs.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::vector<std::string>> rows{{"Variable", "VIF"}};
  for (const auto& [name, v] : vifs) rows.push_back({name, format_fixed(v, 2)});
  return detail::render_grid(rows);
}

struct GrangerRow {
  std::string variable;
  TestResult selected;
};

/// "Variable  Lag  p-value" with the causality star scheme, ordered by p.
inline std::string granger_table(std::vector<GrangerRow> rows_in) {
  std::stable_sort(rows_in.begin(), rows_in.end(),
                   [](const auto& a, const auto& b) { return a.selected.p_value < b.selected.p_value; });
  std::vector<std::vector<std::string>> rows{{"Variable", "Lag", "p-value"}};
  for (const auto& r : rows_in)
    rows.push_back({r.variable, r.selected.lag ? std::to_string(*r.selected.lag) : "",
                    format_fixed(r.selected.p_value, 4) + granger_stars(r.selected.p_value)});
  return detail::render_grid(rows) + kGrangerLegend + "\n";
}

/// One line per test for ADF / Chow style results.
inline std::string test_table(const std::vector<std::pair<std::string, TestResult>>& tests) {
  std::vector<std::vector<std::string>> rows{{"Series", "Test", "Statistic", "Lag", "p-value"}};
  for (const auto& [label, r] : tests)
    rows.push_back({label, r.test_name, format_fixed(r.statistic, 4), r.lag ? std::to_string(*r.lag) : "",
                    format_fixed(r.p_value, 4)});
  return detail::render_grid(rows);
}

}  // namespace restake::econ
