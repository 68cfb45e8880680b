#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/econometrics/design_matrix.hpp"

namespace restake::econ {

/// Nearest-rank (inclusive) empirical quantile: the ceil(p n)-th smallest value.
inline double nearest_rank_quantile(std::vector<double> sorted_or_not, double p) {
  if (sorted_or_not.empty()) throw ValidationError("quantile of an empty series");
  std::sort(sorted_or_not.begin(), sorted_or_not.end());
  const double n = static_cast<double>(sorted_or_not.size());
  // the epsilon absorbs representation error in p * n (0.99 * 100 -> 99)
  const auto rank = static_cast<long long>(std::ceil(p * n - 1e-9));
  const auto idx = std::clamp<long long>(rank - 1, 0, static_cast<long long>(sorted_or_not.size()) - 1);
  return sorted_or_not[static_cast<std::size_t>(idx)];
}

/// Clamps values to the [lower_pct, upper_pct] nearest-rank quantiles.
inline std::vector<double> winsorize(std::span<const double> series, double lower_pct = 0.01,
                                     double upper_pct = 0.99) {
  if (series.empty()) throw ValidationError("winsorize: empty series");
  if (!(lower_pct >= 0 && lower_pct < upper_pct && upper_pct <= 1))
    throw ValidationError("winsorize: need 0 <= lower_pct < upper_pct <= 1");
  std::vector<double> copy(series.begin(), series.end());
  const double lo = nearest_rank_quantile(copy, lower_pct);
  const double hi = nearest_rank_quantile(copy, upper_pct);
  for (double& v : copy) v = std::clamp(v, lo, hi);
  return copy;
}

/// Winsorizes the response and every regressor except `keep` (dummies).
inline DesignMatrix winsorize_design(const DesignMatrix& x, double lower_pct, double upper_pct,
                                     const std::set<std::string>& keep = {"Events"}) {
  std::vector<Column> cols;
  for (const auto& c : x.columns())
    cols.push_back(keep.contains(c.name) ? c : Column{c.name, winsorize(c.values, lower_pct, upper_pct)});
  return DesignMatrix(x.dates(), x.y_name(), winsorize(x.y(), lower_pct, upper_pct), std::move(cols));
}

}  // namespace restake::econ
