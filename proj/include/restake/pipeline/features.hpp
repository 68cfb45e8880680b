#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/error.hpp"
#include "restake/core/io.hpp"
#include "restake/econometrics/design_matrix.hpp"
#include "restake/pipeline/panel.hpp"
#include "restake/pipeline/series.hpp"

namespace restake::pipeline {

/// Raw panel column names.
namespace raw {
inline constexpr const char* kRevenue = "revenue";
inline constexpr const char* kTvlEigenlayer = "tvl_eigenlayer";
inline constexpr const char* kTvlRenzoEthereum = "tvl_renzo_ethereum";
/// Either this column or one or more `tvl_renzo_l2_<chain>` components.
inline constexpr const char* kTvlRenzoL2 = "tvl_renzo_l2";
inline constexpr const char* kTvlRenzoL2Prefix = "tvl_renzo_l2_";
inline constexpr const char* kEzethYield = "ezeth_yield";
inline constexpr const char* kEzethPrice = "ezeth_price";
inline constexpr const char* kEthPrice = "eth_price";
inline constexpr const char* kEzethSupply = "ezeth_supply";
inline constexpr const char* kLrpTotalSupply = "lrp_total_supply";
inline constexpr const char* kStethApy = "steth_apy";
inline constexpr const char* kTxFee = "tx_fee";
inline constexpr const char* kFgi = "fgi";
}  // namespace raw

/// Regressors in coefficient order; the response is "Revenue".
inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names{"TVL0",  "TVL1",   "TVL2", "Yield", "Premium", "Share",
                                              "APY",   "Events", "ETH",  "TxFee", "FGI"};
  return names;
}

inline constexpr const char* kResponseName = "Revenue";

inline const std::array<Date, 4>& event_dates() {
  static const std::array<Date, 4> dates{Date(2024, 4, 26), Date(2024, 4, 29), Date(2024, 4, 30),
                                         Date(2024, 10, 1)};
  return dates;
}

inline constexpr std::size_t kRollingWindow = 7;
/// Leading rows dropped: the rolling std of returns needs kRollingWindow returns.
inline constexpr std::size_t kWarmupRows = kRollingWindow;

/// Design matrix plus the transform chain that produced each column.
struct FeatureFrame {
  econ::DesignMatrix design;
  /// Keyed by column name, including the response.
  std::map<std::string, std::vector<std::string>> transforms;
  std::size_t warmup_dropped = 0;
  std::size_t input_rows = 0;
  std::map<std::string, std::size_t> fill_counts;

  std::size_t rows() const noexcept { return design.n(); }

  bool operator==(const FeatureFrame&) const = default;
};

namespace detail {

inline std::vector<double> log_of(const Panel& p, const std::string& label, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0))
      throw DataError("log of non-positive value " + format_double(v[i]) + " in column '" + label + "' on " +
                      p.dates[i].iso());
    out[i] = std::log(v[i]);
  }
  return out;
}

/// First difference; element 0 is NaN.
inline std::vector<double> diff(const std::vector<double>& v) {
  std::vector<double> out(v.size(), std::nan(""));
  for (std::size_t i = 1; i < v.size(); ++i) out[i] = v[i] - v[i - 1];
  return out;
}

/// Sample std over the trailing `w` values ending at i; NaN until w finite values exist.
inline std::vector<double> rolling_std(const std::vector<double>& v, std::size_t w) {
  std::vector<double> out(v.size(), std::nan(""));
  for (std::size_t i = w - 1; i < v.size(); ++i) {
    double mean = 0;
    bool ok = true;
    for (std::size_t j = i + 1 - w; j <= i; ++j) {
      ok = ok && std::isfinite(v[j]);
      mean += v[j];
    }
    if (!ok) continue;
    mean /= static_cast<double>(w);
    double ss = 0;
    for (std::size_t j = i + 1 - w; j <= i; ++j) ss += (v[j] - mean) * (v[j] - mean);
    out[i] = std::sqrt(ss / static_cast<double>(w - 1));
  }
  return out;
}

inline std::vector<std::string> l2_components(const Panel& p) {
  std::vector<std::string> out;
  const std::string prefix = raw::kTvlRenzoL2Prefix;
  for (const auto& [name, _] : p.columns)
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  return out;
}

}  // namespace detail

/// Aggregate Renzo L2 TVL: the `tvl_renzo_l2` column if present, else the
/// sum of its per-chain components.
inline std::vector<double> l2_aggregate(const Panel& p) {
  if (p.has(raw::kTvlRenzoL2)) return p.at(raw::kTvlRenzoL2);
  const auto parts = detail::l2_components(p);
  if (parts.empty())
    throw ValidationError(std::string("panel lacks '") + raw::kTvlRenzoL2 + "' and any '" + raw::kTvlRenzoL2Prefix +
                          "<chain>' columns");
  std::vector<double> sum(p.rows(), 0.0);
  for (const auto& name : parts)
    for (std::size_t i = 0; i < p.rows(); ++i) sum[i] += p.at(name)[i];
  return sum;
}

inline std::vector<double> premium_pct(const std::vector<double>& ez, const std::vector<double>& eth,
                                       const Panel& p) {
  std::vector<double> out(ez.size());
  for (std::size_t i = 0; i < ez.size(); ++i) {
    if (!(eth[i] > 0))
      throw DataError("non-positive ETH price " + format_double(eth[i]) + " on " + p.dates[i].iso());
    out[i] = 100.0 * (ez[i] / eth[i] - 1.0);
  }
  return out;
}

/// Builds the regression frame from a raw daily panel and drops the warm-up rows.
inline FeatureFrame engineer_features(const Panel& p) {
  for (const char* c : {raw::kRevenue, raw::kTvlEigenlayer, raw::kTvlRenzoEthereum, raw::kEzethYield,
                        raw::kEzethPrice, raw::kEthPrice, raw::kEzethSupply, raw::kLrpTotalSupply,
                        raw::kStethApy, raw::kTxFee, raw::kFgi})
    if (!p.has(c)) throw ValidationError(std::string("panel lacks required column '") + c + "'");
  if (p.rows() <= kWarmupRows)
    throw InsufficientDataError("panel has " + std::to_string(p.rows()) + " rows; the " +
                                std::to_string(kRollingWindow) + "-day rolling window needs more than " +
                                std::to_string(kWarmupRows));
  for (std::size_t i = 1; i < p.rows(); ++i)
    if (p.dates[i] - p.dates[i - 1] != 1) throw ValidationError("panel is not strictly daily at " + p.dates[i].iso());

  using detail::diff;
  using detail::log_of;
  FeatureFrame f;
  f.input_rows = p.rows();
  f.fill_counts = p.fill_counts;
  std::map<std::string, std::vector<double>> full;

  full[kResponseName] = log_of(p, raw::kRevenue, p.at(raw::kRevenue));
  f.transforms[kResponseName] = {"log"};
  full["TVL0"] = log_of(p, raw::kTvlEigenlayer, p.at(raw::kTvlEigenlayer));
  f.transforms["TVL0"] = {"log"};
  full["TVL1"] = diff(log_of(p, raw::kTvlRenzoEthereum, p.at(raw::kTvlRenzoEthereum)));
  f.transforms["TVL1"] = {"log", "diff"};
  const bool summed = !p.has(raw::kTvlRenzoL2);
  full["TVL2"] = log_of(p, summed ? "tvl_renzo_l2 (sum of components)" : raw::kTvlRenzoL2, l2_aggregate(p));
  f.transforms["TVL2"] = summed ? std::vector<std::string>{"sum", "log"} : std::vector<std::string>{"log"};
  full["Yield"] = p.at(raw::kEzethYield);
  f.transforms["Yield"] = {"level"};
  full["Premium"] = premium_pct(p.at(raw::kEzethPrice), p.at(raw::kEthPrice), p);
  f.transforms["Premium"] = {"pct_dev"};
  {
    const auto& ez = p.at(raw::kEzethSupply);
    const auto& total = p.at(raw::kLrpTotalSupply);
    std::vector<double> share(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) {
      if (!(total[i] > 0))
        throw DataError("non-positive total LRP supply " + format_double(total[i]) + " on " + p.dates[i].iso());
      share[i] = ez[i] / total[i];
    }
    full["Share"] = std::move(share);
    f.transforms["Share"] = {"ratio"};
  }
  full["APY"] = p.at(raw::kStethApy);
  f.transforms["APY"] = {"level"};
  {
    std::vector<double> ev(p.rows(), 0.0);
    const std::set<Date> on(event_dates().begin(), event_dates().end());
    for (std::size_t i = 0; i < p.rows(); ++i) ev[i] = on.contains(p.dates[i]) ? 1.0 : 0.0;
    full["Events"] = std::move(ev);
    f.transforms["Events"] = {"dummy"};
  }
  full["ETH"] = diff(log_of(p, raw::kEthPrice, p.at(raw::kEthPrice)));
  f.transforms["ETH"] = {"log", "diff"};
  full["TxFee"] = detail::rolling_std(diff(log_of(p, raw::kTxFee, p.at(raw::kTxFee))), kRollingWindow);
  f.transforms["TxFee"] = {"log", "diff", "roll_std_7"};
  full["FGI"] = diff(p.at(raw::kFgi));
  f.transforms["FGI"] = {"diff"};

  const auto b = static_cast<std::ptrdiff_t>(kWarmupRows);
  auto tail = [&](const std::vector<double>& v) { return std::vector<double>(v.begin() + b, v.end()); };
  std::vector<econ::Column> cols;
  for (const auto& name : feature_names()) cols.push_back({name, tail(full[name])});
  f.design = econ::DesignMatrix(std::vector<Date>(p.dates.begin() + b, p.dates.end()), kResponseName,
                                tail(full[kResponseName]), std::move(cols));
  f.warmup_dropped = kWarmupRows;
  return f;
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json to_json(const FeatureFrame& f) {
  nlohmann::json j;
  j["rows"] = f.rows();
  j["input_rows"] = f.input_rows;
  j["warmup_dropped"] = f.warmup_dropped;
  j["fill_counts"] = f.fill_counts;
  j["dates"] = nlohmann::json::array();
  for (const auto& d : f.design.dates()) j["dates"].push_back(d.iso());
  auto column = [&](const std::string& name, const std::vector<double>& v) {
    const auto it = f.transforms.find(name);
    return nlohmann::json{{"name", name},
                          {"transforms", it == f.transforms.end() ? std::vector<std::string>{} : it->second},
                          {"values", v}};
  };
  j["response"] = column(f.design.y_name(), f.design.y());
  j["columns"] = nlohmann::json::array();
  for (const auto& c : f.design.columns()) j["columns"].push_back(column(c.name, c.values));
  return j;
}

inline FeatureFrame feature_frame_from_json(const nlohmann::json& j) {
  FeatureFrame f;
  try {
    f.input_rows = j.at("input_rows").get<std::size_t>();
    f.warmup_dropped = j.at("warmup_dropped").get<std::size_t>();
    f.fill_counts = j.value("fill_counts", std::map<std::string, std::size_t>{});
    std::vector<Date> dates;
    for (const auto& d : j.at("dates")) dates.push_back(Date::parse(d.get<std::string>()));
    const auto& r = j.at("response");
    f.transforms[r.at("name").get<std::string>()] = r.at("transforms").get<std::vector<std::string>>();
    std::vector<econ::Column> cols;
    for (const auto& c : j.at("columns")) {
      cols.push_back({c.at("name").get<std::string>(), c.at("values").get<std::vector<double>>()});
      f.transforms[cols.back().name] = c.at("transforms").get<std::vector<std::string>>();
    }
    f.design = econ::DesignMatrix(std::move(dates), r.at("name").get<std::string>(),
                                  r.at("values").get<std::vector<double>>(), std::move(cols));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed feature frame: ") + e.what());
  }
  return f;
}

/// Wide CSV: date, response, regressors. Provenance rides in leading `#` lines.
inline std::string to_csv(const FeatureFrame& f) {
  auto chain = [&](const std::string& name) {
    std::string out;
    const auto it = f.transforms.find(name);
    if (it != f.transforms.end())
      for (const auto& t : it->second) out += (out.empty() ? "" : "|") + t;
    return out;
  };
  std::string out = "# input_rows=" + std::to_string(f.input_rows) +
                    " warmup_dropped=" + std::to_string(f.warmup_dropped) + "\n";
  if (!f.fill_counts.empty()) {
    out += "# fills";
    for (const auto& [name, n] : f.fill_counts) out += " " + name + "=" + std::to_string(n);
    out += "\n";
  }
  out += "# transforms " + f.design.y_name() + "=" + chain(f.design.y_name());
  for (const auto& c : f.design.columns()) out += " " + c.name + "=" + chain(c.name);
  out += "\ndate," + f.design.y_name();
  for (const auto& c : f.design.columns()) out += "," + c.name;
  out += "\n";
  for (std::size_t i = 0; i < f.rows(); ++i) {
    out += f.design.dates()[i].iso() + "," + format_double(f.design.y()[i]);
    for (const auto& c : f.design.columns()) out += "," + format_double(c.values[i]);
    out += "\n";
  }
  return out;
}

inline FeatureFrame feature_frame_from_csv(const std::string& text, const std::string& origin = "csv") {
  FeatureFrame f;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line) && !line.empty() && line.front() == '#') {
    std::istringstream words(line.substr(1));
    std::string tag;
    words >> tag;
    std::string kv;
    std::vector<std::pair<std::string, std::string>> pairs;
    if (tag.find('=') != std::string::npos) pairs.emplace_back(tag.substr(0, tag.find('=')), tag.substr(tag.find('=') + 1));
    while (words >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DataError(origin + ": malformed provenance line '" + line + "'");
      pairs.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : pairs) {
      if (tag == "transforms") {
        auto& chain = f.transforms[k];
        std::size_t pos = 0;
        while (pos < v.size()) {
          const auto bar = v.find('|', pos);
          chain.push_back(v.substr(pos, bar == std::string::npos ? std::string::npos : bar - pos));
          pos = bar == std::string::npos ? v.size() : bar + 1;
        }
      } else if (tag == "fills") {
        f.fill_counts[k] = std::stoul(v);
      } else if (k == "input_rows") {
        f.input_rows = std::stoul(v);
      } else if (k == "warmup_dropped") {
        f.warmup_dropped = std::stoul(v);
      }
    }
  }
  const auto rest = line + "\n" + std::string(std::istreambuf_iterator<char>(in), {});
  auto series = read_panel_csv(rest, origin);
  if (series.empty()) throw DataError(origin + ": no response column");
  const auto header = detail::split_csv_line(line);
  std::vector<Date> dates;
  for (const auto& [d, _] : series.front().points) dates.push_back(d);
  auto values = [&](const RawSeries& s) {
    if (s.points.size() != dates.size()) throw DataError(origin + ": column '" + s.series_name + "' has gaps");
    std::vector<double> v;
    for (const auto& [_, x] : s.points) v.push_back(x);
    return v;
  };
  std::vector<econ::Column> cols;
  for (std::size_t i = 1; i < series.size(); ++i) cols.push_back({series[i].series_name, values(series[i])});
  f.design = econ::DesignMatrix(std::move(dates), header.at(1), values(series.front()), std::move(cols));
  return f;
}

}  // namespace restake::pipeline
