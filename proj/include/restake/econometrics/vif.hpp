#pragma once

#include <string>
#include <utility>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/econometrics/ols.hpp"

namespace restake::econ {

/// VIF_j = 1 / (1 - R^2_j), R^2_j from regressing column j on the others
/// (with intercept). Order follows the design's columns.
inline std::vector<std::pair<std::string, double>> vif(const DesignMatrix& x) {
  if (x.columns().size() < 2)
    throw ValidationError("VIF needs at least two regressors besides the intercept");
  if (x.n() <= x.k()) throw InsufficientDataError("VIF needs n > k");
  detail::check_rank(x.matrix(), x.parameter_names());
  std::vector<std::pair<std::string, double>> out;
  for (const auto& target : x.columns()) {
    const DesignMatrix aux = x.without({target.name}).with_response(target.name, target.values);
    const OlsFit fit = ols_fit(aux);
    const double unexplained = 1.0 - fit.r2;
    if (!(unexplained > 0))
      throw SingularDesignError("infinite VIF for column '" + target.name + "'", {target.name});
    out.emplace_back(target.name, 1.0 / unexplained);
  }
  return out;
}

}  // namespace restake::econ
