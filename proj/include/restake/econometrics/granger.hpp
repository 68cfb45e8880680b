#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/econometrics/ols.hpp"
#include "restake/econometrics/test_result.hpp"

namespace restake::econ {

namespace detail {

/// Regressions on rows t = lag..n-1: effect_t on its own lags (restricted),
/// optionally adding the cause's lags (unrestricted).
inline DesignMatrix granger_design(std::span<const double> cause, std::span<const double> effect,
                                   int lag, bool with_cause) {
  const auto l = static_cast<std::size_t>(lag);
  const std::size_t rows = effect.size() - l;
  std::vector<double> y(rows);
  std::vector<Column> cols;
  for (int i = 1; i <= lag; ++i) cols.push_back({"effect_l" + std::to_string(i), std::vector<double>(rows)});
  if (with_cause)
    for (int i = 1; i <= lag; ++i) cols.push_back({"cause_l" + std::to_string(i), std::vector<double>(rows)});
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + l;
    y[r] = effect[t];
    for (std::size_t i = 1; i <= l; ++i) {
      cols[i - 1].values[r] = effect[t - i];
      if (with_cause) cols[l + i - 1].values[r] = cause[t - i];
    }
  }
  return DesignMatrix::on_days(std::move(y), std::move(cols));
}

}  // namespace detail

/// F-test that `cause` lags 1..lag add predictive power for `effect` beyond
/// its own lags. df = (lag, n_eff - 2 lag - 1) with n_eff = n - lag.
inline TestResult granger_test(std::span<const double> cause, std::span<const double> effect, int lag) {
  if (lag < 1) throw ValidationError("Granger test needs lag >= 1");
  if (cause.size() != effect.size()) throw ValidationError("Granger test needs equal-length series");
  const std::size_t n = effect.size();
  if (n <= static_cast<std::size_t>(2 * lag + 10))
    throw InsufficientDataError("Granger test needs more than 2*lag + 10 observations");
  const auto [lo, hi] = std::minmax_element(effect.begin(), effect.end());
  if (*lo == *hi) throw DegenerateInputError("Granger test: effect series is constant");

  const OlsFit restricted = ols_fit(detail::granger_design(cause, effect, lag, false));
  const OlsFit unrestricted = ols_fit(detail::granger_design(cause, effect, lag, true));
  const double df_num = lag;
  const double df_den = static_cast<double>(unrestricted.n) - 2.0 * lag - 1.0;
  const double f = ((restricted.rss - unrestricted.rss) / df_num) / (unrestricted.rss / df_den);
  TestResult r = make_result("Granger", f, f_sf(f, df_num, df_den));
  r.df_num = df_num;
  r.df_den = df_den;
  r.lag = lag;
  r.nobs = unrestricted.n;
  return r;
}

/// granger_test at lags 1..max_lag; the minimum-p entry (smallest lag on
/// ties) is flagged `selected`.
inline std::vector<TestResult> granger_scan(std::span<const double> cause, std::span<const double> effect,
                                            int max_lag = 5) {
  if (max_lag < 1) throw ValidationError("Granger scan needs max_lag >= 1");
  std::vector<TestResult> out;
  for (int l = 1; l <= max_lag; ++l) out.push_back(granger_test(cause, effect, l));
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].p_value < out[best].p_value) best = i;
  out[best].selected = true;
  if (max_lag > 1)
    out[best].notes.push_back("selected as minimum p over " + std::to_string(max_lag) +
                              " lags; not adjusted for multiple testing");
  return out;
}

inline const TestResult& selected(const std::vector<TestResult>& scan) {
  for (const auto& r : scan)
    if (r.selected) return r;
  throw ValidationError("scan has no selected entry");
}

}  // namespace restake::econ
