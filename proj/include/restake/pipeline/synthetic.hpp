#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/rng.hpp"
#include "restake/pipeline/features.hpp"
#include "restake/pipeline/panel.hpp"

namespace restake::pipeline {

inline constexpr std::uint64_t kSyntheticSeed = 20240122;
/// The fixture window: seven warm-up days before the regression sample.
inline constexpr Date kSyntheticStart{2024, 1, 15};
inline constexpr Date kSyntheticEnd{2025, 4, 17};

inline const std::vector<std::string>& l2_chains() {
  static const std::vector<std::string> chains{"arbitrum", "base", "blast", "linea", "mode"};
  return chains;
}

/// Deterministic stand-in with the raw columns of the real panel. Log revenue
/// loads on the previous day's log L2 TVL, yield and premium, so the lagged
/// regression fits best at lag 1 and L2 TVL Granger-causes revenue at lag 1.
inline Panel synthetic_panel(std::uint64_t seed = kSyntheticSeed, Date start = kSyntheticStart,
                             Date end = kSyntheticEnd) {
  auto tidy = [](std::vector<double> v) {
    for (auto& x : v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", x);
      x = std::strtod(buf, nullptr);
    }
    return v;
  };
  const auto n = static_cast<std::size_t>(days_inclusive(start, end));
  Panel p;
  for (Date d = start; d <= end; ++d) p.dates.push_back(d);
  const Rng root(seed);
  std::uint64_t stream = 0;

  auto walk = [&](double x0, double drift, double sd) {
    Rng r = root.split(stream++);
    std::vector<double> v(n);
    double x = std::log(x0);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) x += drift + sd * r.normal();
      v[i] = std::exp(x);
    }
    return v;
  };
  auto ar1 = [&](double mean, double phi, double sd) {
    Rng r = root.split(stream++);
    std::vector<double> v(n);
    double x = mean;
    for (std::size_t i = 0; i < n; ++i) {
      x = mean + phi * (x - mean) + sd * r.normal();
      v[i] = x;
    }
    return v;
  };

  const auto eth = walk(2500.0, 0.0004, 0.03);
  auto eigen = walk(2.0e9, 0.0030, 0.025);
  for (std::size_t i = 0; i < n; ++i) eigen[i] *= std::pow(eth[i] / eth[0], 0.6);
  const auto renzo_eth = walk(1.5e8, 0.0060, 0.05);
  std::vector<double> l2_total(n, 0.0);
  const double l2_start[] = {6.0e6, 3.0e6, 4.0e6, 8.0e6, 1.0e6};
  std::size_t c = 0;
  for (const auto& chain : l2_chains()) {
    const auto v = walk(l2_start[c++], 0.006, 0.05);
    for (std::size_t i = 0; i < n; ++i) l2_total[i] += v[i];
    p.columns[std::string(raw::kTvlRenzoL2Prefix) + chain] = tidy(v);
    p.units[std::string(raw::kTvlRenzoL2Prefix) + chain] = "USD";
  }

  const auto yield = ar1(0.35, 0.3, 0.06);
  auto premium = ar1(0.0, 0.5, 0.5);
  for (std::size_t i = 0; i < n; ++i)
    if (p.dates[i] == Date(2024, 4, 24)) premium[i] -= 3.0;
  std::vector<double> ez_price(n);
  for (std::size_t i = 0; i < n; ++i) ez_price[i] = eth[i] * (1.0 + premium[i] / 100.0);

  const auto share = ar1(0.15, 0.97, 0.004);
  const auto lrp_total = walk(1.0e6, 0.003, 0.01);
  std::vector<double> ez_supply(n);
  for (std::size_t i = 0; i < n; ++i) ez_supply[i] = share[i] * lrp_total[i];

  const auto apy = ar1(3.1, 0.9, 0.1);
  const auto fee = walk(4.0, 0.0, 0.2);
  std::vector<double> fgi(n);
  {
    Rng r = root.split(stream++);
    double x = 55;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) x = std::clamp(x + std::round(5.0 * r.normal()), 10.0, 94.0);
      fgi[i] = x;
    }
  }

  std::vector<double> revenue(n);
  {
    Rng r = root.split(stream++);
    const double l2_ref = std::log(l2_total[0]);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i == 0 ? 0 : i - 1;
      const double log_rev = 11.0 + 1.0 * (std::log(l2_total[j]) - l2_ref) + 2.0 * (yield[j] - 0.35) +
                             0.15 * premium[j] + 0.25 * r.normal();
      revenue[i] = std::exp(log_rev);
    }
  }

  auto put = [&](const char* name, std::vector<double> v, const char* units) {
    p.columns[name] = tidy(std::move(v));
    p.units[name] = units;
  };
  put(raw::kRevenue, revenue, "USD");
  put(raw::kTvlEigenlayer, eigen, "USD");
  put(raw::kTvlRenzoEthereum, renzo_eth, "USD");
  put(raw::kEzethYield, yield, "percent");
  put(raw::kEzethPrice, ez_price, "USD");
  put(raw::kEthPrice, eth, "USD");
  put(raw::kEzethSupply, ez_supply, "ETH");
  put(raw::kLrpTotalSupply, lrp_total, "ETH");
  put(raw::kStethApy, apy, "percent");
  put(raw::kTxFee, fee, "USD");
  put(raw::kFgi, fgi, "index");
  return p;
}

/// Splits a panel into one RawSeries per column.
inline std::vector<RawSeries> to_series(const Panel& p) {
  std::vector<RawSeries> out;
  for (const auto& [name, v] : p.columns) {
    RawSeries s{name, {}, p.units.contains(name) ? p.units.at(name) : "", ""};
    for (std::size_t i = 0; i < p.rows(); ++i) s.add(p.dates[i], v[i]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace restake::pipeline
