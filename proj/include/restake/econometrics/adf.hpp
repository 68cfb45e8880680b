#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/econometrics/mackinnon.hpp"
#include "restake/econometrics/ols.hpp"
#include "restake/econometrics/test_result.hpp"

namespace restake::econ {

inline const char* to_string(AdfSpec s) { return s == AdfSpec::ConstantOnly ? "constant" : "constant+trend"; }

/// floor(12 (n/100)^(1/4)).
inline int adf_default_max_lag(std::size_t n) {
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

namespace detail {

/// Regression of dy_t on [trend], y_{t-1}, dy_{t-1..t-lags} over rows that
/// leave `reserve` lags of history, so every candidate lag uses one sample.
inline DesignMatrix adf_design(std::span<const double> x, int lags, int reserve, AdfSpec spec) {
  const std::size_t n = x.size();
  const auto r = static_cast<std::size_t>(reserve);
  const std::size_t nobs = n - 1 - r;
  std::vector<double> dy(nobs);
  std::vector<Column> cols;
  if (spec == AdfSpec::ConstantTrend) cols.push_back({"trend", std::vector<double>(nobs)});
  cols.push_back({"level", std::vector<double>(nobs)});
  for (int l = 1; l <= lags; ++l) cols.push_back({"dlag" + std::to_string(l), std::vector<double>(nobs)});
  const std::size_t level_col = spec == AdfSpec::ConstantTrend ? 1 : 0;
  for (std::size_t i = 0; i < nobs; ++i) {
    const std::size_t j = r + i;  // dy index
    dy[i] = x[j + 1] - x[j];
    if (spec == AdfSpec::ConstantTrend) cols[0].values[i] = static_cast<double>(i + 1);
    cols[level_col].values[i] = x[j];
    for (int l = 1; l <= lags; ++l) {
      const std::size_t jl = j - static_cast<std::size_t>(l);
      cols[level_col + static_cast<std::size_t>(l)].values[i] = x[jl + 1] - x[jl];
    }
  }
  return DesignMatrix::on_days(std::move(dy), std::move(cols));
}

inline double gaussian_aic(const OlsFit& f) {
  const double n = static_cast<double>(f.n);
  const double llf = -0.5 * n * (std::log(2.0 * std::numbers::pi) + std::log(f.rss / n) + 1.0);
  return -2.0 * llf + 2.0 * static_cast<double>(f.k);
}

}  // namespace detail

/// Augmented Dickey-Fuller test. Lag order is chosen by AIC over 0..max_lag
/// on a common sample, then the chosen model is refit on all usable rows.
/// The statistic is the t-ratio on y_{t-1}; rejecting means stationary.
inline TestResult adf_test(std::span<const double> series, std::optional<int> max_lag = std::nullopt,
                           AdfSpec spec = AdfSpec::ConstantOnly) {
  const std::size_t n = series.size();
  if (n == 0) throw InsufficientDataError("ADF: empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw DegenerateInputError("ADF: series is constant");
  const int ntrend = spec == AdfSpec::ConstantOnly ? 1 : 2;
  int lmax = max_lag.value_or(std::min(adf_default_max_lag(n), static_cast<int>(n / 2) - ntrend - 1));
  if (lmax < 0) throw InsufficientDataError("ADF: series too short");
  if (n <= static_cast<std::size_t>(lmax) + 10)
    throw InsufficientDataError("ADF: need more than max_lag + 10 observations");

  try {
    int best_lag = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= lmax; ++l) {
      const double aic = detail::gaussian_aic(ols_fit(detail::adf_design(series, l, lmax, spec)));
      if (aic < best_aic) {
        best_aic = aic;
        best_lag = l;
      }
    }
    const OlsFit fit = ols_fit(detail::adf_design(series, best_lag, best_lag, spec));
    const std::size_t level = fit.index_of("level");
    const double tau = fit.t_stats[level];
    TestResult r = make_result("ADF", tau, mackinnon_p(tau, spec));
    r.lag = best_lag;
    r.nobs = fit.n;
    r.critical_values = mackinnon_critical_values(spec, fit.n);
    r.notes.push_back(std::string("deterministic terms: ") + to_string(spec) +
                      "; lag chosen by AIC up to " + std::to_string(lmax));
    return r;
  } catch (const SingularDesignError& ex) {
    throw DegenerateInputError(std::string("ADF: degenerate regression (") + ex.what() + ")");
  }
}

}  // namespace restake::econ
