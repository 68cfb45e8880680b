#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/econometrics/report.hpp"
#include "restake/pipeline/features.hpp"
#include "restake/pipeline/panel.hpp"

namespace restake::pipeline {

struct SummaryRow {
  std::string name;
  std::size_t n = 0;
  double mean = 0;
  double std = 0;  ///< sample (n - 1); 0 when n == 1
  double min = 0;
  double max = 0;

  bool operator==(const SummaryRow&) const = default;
};

struct SummaryTable {
  std::string view;  ///< "raw" or "engineered"
  std::string first_date;
  std::string last_date;
  std::vector<SummaryRow> rows;

  bool operator==(const SummaryTable&) const = default;
};

inline SummaryRow describe(const std::string& name, const std::vector<double>& v) {
  if (v.empty()) throw ValidationError("summary_stats: column '" + name + "' is empty");
  SummaryRow r{name, v.size(), 0, 0, v.front(), v.front()};
  for (double x : v) {
    r.mean += x;
    r.min = std::min(r.min, x);
    r.max = std::max(r.max, x);
  }
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1 && r.min != r.max) {
    double ss = 0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  if (r.min == r.max) r.mean = r.min;
  return r;
}

/// Per-column moments of the engineered frame, response first.
inline SummaryTable summary_stats(const FeatureFrame& f) {
  if (f.rows() == 0) throw ValidationError("summary_stats: empty feature frame");
  SummaryTable t{"engineered", f.design.dates().front().iso(), f.design.dates().back().iso(), {}};
  t.rows.push_back(describe(f.design.y_name(), f.design.y()));
  for (const auto& c : f.design.columns()) t.rows.push_back(describe(c.name, c.values));
  return t;
}

/// Raw magnitudes in the layout of the published summary table: TVLs in $mn,
/// market share in percent, Premium as the percent deviation, FGI as a level.
/// Rows from `first_row` on, so the window matches the regression sample.
inline SummaryTable summary_stats(const Panel& p, std::size_t first_row = kWarmupRows) {
  if (p.rows() <= first_row) throw ValidationError("summary_stats: panel has no rows after the warm-up");
  const Panel w = p.slice(first_row, p.rows());
  SummaryTable t{"raw", w.dates.front().iso(), w.dates.back().iso(), {}};
  auto scaled = [](std::vector<double> v, double k) {
    for (auto& x : v) x *= k;
    return v;
  };
  t.rows.push_back(describe("Revenue ($)", w.at(raw::kRevenue)));
  t.rows.push_back(describe("TVL0 ($mn)", scaled(w.at(raw::kTvlEigenlayer), 1e-6)));
  t.rows.push_back(describe("TVL1 ($mn)", scaled(w.at(raw::kTvlRenzoEthereum), 1e-6)));
  t.rows.push_back(describe("TVL2 ($mn)", scaled(l2_aggregate(w), 1e-6)));
  t.rows.push_back(describe("Yield", w.at(raw::kEzethYield)));
  t.rows.push_back(describe("Premium", premium_pct(w.at(raw::kEzethPrice), w.at(raw::kEthPrice), w)));
  std::vector<double> share(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i)
    share[i] = 100.0 * w.at(raw::kEzethSupply)[i] / w.at(raw::kLrpTotalSupply)[i];
  t.rows.push_back(describe("Market Share", share));
  t.rows.push_back(describe("APY", w.at(raw::kStethApy)));
  t.rows.push_back(describe("ETH ($)", w.at(raw::kEthPrice)));
  t.rows.push_back(describe("TxFee", w.at(raw::kTxFee)));
  t.rows.push_back(describe("FGI", w.at(raw::kFgi)));
  return t;
}

inline nlohmann::json to_json(const SummaryTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"name", r.name}, {"n", r.n}, {"mean", r.mean}, {"std", r.std}, {"min", r.min}, {"max", r.max}});
  return {{"view", t.view}, {"first_date", t.first_date}, {"last_date", t.last_date}, {"rows", rows}};
}

inline std::string render_table(const SummaryTable& t, int decimals = 3) {
  std::vector<std::vector<std::string>> grid{{"Metric", "Mean", "Std. Dev.", "Min", "Max"}};
  for (const auto& r : t.rows)
    grid.push_back({r.name, format_fixed(r.mean, decimals), format_fixed(r.std, decimals),
                    format_fixed(r.min, decimals), format_fixed(r.max, decimals)});
  const std::size_t n = t.rows.empty() ? 0 : t.rows.front().n;
  return econ::detail::render_grid(grid) + "Note: " + t.view + " view, " + std::to_string(n) + " observations from " +
         t.first_date + " to " + t.last_date + ", sample standard deviation (n-1).\n";
}

inline std::string to_csv(const SummaryTable& t) {
  std::string out = "metric,n,mean,std,min,max\n";
  for (const auto& r : t.rows)
    out += r.name + "," + std::to_string(r.n) + "," + format_double(r.mean) + "," + format_double(r.std) + "," +
           format_double(r.min) + "," + format_double(r.max) + "\n";
  return out;
}

}  // namespace restake::pipeline
