#pragma once

// Seeded synthetic series for Monte-Carlo harnesses.

#include <cmath>
#include <vector>

#include "restake/core/rng.hpp"
#include "restake/econometrics/design_matrix.hpp"

namespace sim {

inline std::vector<double> white_noise(restake::Rng& rng, std::size_t n, double sd = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0, sd);
  return v;
}

inline std::vector<double> random_walk(restake::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double level = 0;
  for (auto& x : v) x = level += rng.normal();
  return v;
}

inline std::vector<double> ar1(restake::Rng& rng, std::size_t n, double phi) {
  std::vector<double> v(n);
  double prev = 0;
  for (auto& x : v) x = prev = phi * prev + rng.normal();
  return v;
}

/// effect_t = coef * cause_{t-lag} + noise
inline std::vector<double> lagged_response(restake::Rng& rng, const std::vector<double>& cause,
                                           std::size_t lag, double coef) {
  std::vector<double> y(cause.size());
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = (t >= lag ? coef * cause[t - lag] : 0.0) + rng.normal();
  return y;
}

/// y = 1 + 0.5 x1 - 0.25 x2 + jump * [t >= n/2] + noise
inline restake::econ::DesignMatrix break_design(restake::Rng& rng, std::size_t n, double jump) {
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t t = 0; t < n; ++t) {
    x1[t] = rng.normal();
    x2[t] = rng.normal();
    y[t] = 1 + 0.5 * x1[t] - 0.25 * x2[t] + (t >= n / 2 ? jump : 0.0) + rng.normal();
  }
  return restake::econ::DesignMatrix::on_days(std::move(y), {{"x1", std::move(x1)}, {"x2", std::move(x2)}});
}

/// Random full-rank design with n rows and k parameters (intercept included).
inline restake::econ::DesignMatrix random_design(restake::Rng& rng, std::size_t n, std::size_t k,
                                                 bool heteroskedastic = false) {
  std::vector<restake::econ::Column> cols;
  for (std::size_t j = 1; j < k; ++j) {
    std::vector<double> v(n);
    const double scale = 0.1 + 10 * rng.uniform();
    for (auto& x : v) x = scale * rng.normal() + rng.uniform();
    cols.push_back({"x" + std::to_string(j), std::move(v)});
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = rng.normal();
    for (const auto& c : cols) mu += 0.3 * c.values[i];
    const double sd = heteroskedastic && !cols.empty() ? 0.5 + std::abs(cols[0].values[i]) : 1.0;
    y[i] = mu + sd * rng.normal();
  }
  return restake::econ::DesignMatrix::on_days(std::move(y), std::move(cols));
}

}  // namespace sim
