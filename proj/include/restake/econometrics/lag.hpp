#pragma once

#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/econometrics/design_matrix.hpp"

namespace restake::econ {

/// Pairs y_t with every regressor at t - lag and drops the first `lag` rows.
/// lag 0 is the identity (the baseline model).
inline DesignMatrix lag_model(const DesignMatrix& x, int lag) {
  if (lag < 0) throw ValidationError("lag must be non-negative");
  const auto l = static_cast<std::size_t>(lag);
  if (l >= x.n()) throw ValidationError("lag must be smaller than the sample size");
  if (lag == 0) return x;
  const auto off = static_cast<std::ptrdiff_t>(l);
  std::vector<Column> cols;
  for (const auto& c : x.columns())
    cols.push_back({c.name, std::vector<double>(c.values.begin(), c.values.end() - off)});
  return DesignMatrix(std::vector<Date>(x.dates().begin() + off, x.dates().end()), x.y_name(),
                      std::vector<double>(x.y().begin() + off, x.y().end()), std::move(cols));
}

}  // namespace restake::econ
