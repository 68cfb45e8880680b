#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/econometrics/design_matrix.hpp"
#include "restake/econometrics/distributions.hpp"

namespace restake::econ {

enum class Covariance { Classical, HC3 };

inline const char* to_string(Covariance c) { return c == Covariance::HC3 ? "HC3" : "classical"; }

struct OlsFit {
  std::vector<std::string> names;  ///< "(Intercept)" first
  std::vector<double> beta;
  std::vector<double> se_classical;
  /// NaN when some observation has leverage 1.
  std::vector<double> se_hc3;
  Covariance cov = Covariance::Classical;
  std::vector<double> t_stats;   ///< under `cov`
  std::vector<double> p_values;  ///< two-sided, n - k df, under `cov`
  double r2 = 0;
  double adj_r2 = 0;
  double rss = 0;
  double tss = 0;
  double sigma2 = 0;
  std::vector<double> residuals;
  std::vector<double> fitted;
  std::vector<double> leverage;
  std::size_t n = 0;
  std::size_t k = 0;

  double coef(const std::string& name) const { return beta.at(index_of(name)); }
  double se(const std::string& name) const {
    const auto i = index_of(name);
    return cov == Covariance::HC3 ? se_hc3.at(i) : se_classical.at(i);
  }
  double p(const std::string& name) const { return p_values.at(index_of(name)); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ValidationError("fit has no parameter '" + name + "'");
  }
};

/// Relative tolerance on |R_jj| / max|R_ii| below which a column counts as
/// linearly dependent.
inline constexpr double kRankTolerance = 1e-10;

namespace detail {

inline void check_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankTolerance);
  const auto rank = qr.rank();
  if (rank == x.cols()) return;
  std::vector<std::string> dependent;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = rank; j < x.cols(); ++j) dependent.push_back(names[static_cast<std::size_t>(perm(j))]);
  std::string list;
  for (const auto& d : dependent) list += (list.empty() ? "" : ", ") + d;
  throw SingularDesignError("singular design: column(s) " + list +
                                " are linear combinations of the others",
                            dependent);
}

inline double two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  return student_t_two_sided(t, df);
}

inline double t_ratio(double beta, double se) {
  if (se > 0) return beta / se;
  if (beta == 0) return 0.0;
  return beta > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Least squares by Householder QR of the design. Classical covariance is
/// s^2 (X'X)^-1; HC3 is (X'X)^-1 X' diag(e_i^2 / (1 - h_ii)^2) X (X'X)^-1.
inline OlsFit ols_fit(const DesignMatrix& design, Covariance cov = Covariance::Classical) {
  const std::size_t n = design.n();
  const std::size_t k = design.k();
  if (n <= k)
    throw InsufficientDataError("OLS needs more observations than parameters (n=" +
                                std::to_string(n) + ", k=" + std::to_string(k) + ")");
  const Eigen::MatrixXd x = design.matrix();
  const Eigen::VectorXd y = design.response();
  const auto names = design.parameter_names();
  detail::check_rank(x, names);

  const auto ni = static_cast<Eigen::Index>(n);
  const auto ki = static_cast<Eigen::Index>(k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ni, ki);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(ki, ki).triangularView<Eigen::Upper>();
  const Eigen::VectorXd beta = r.triangularView<Eigen::Upper>().solve(q.transpose() * y);
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(ki, ki));
  const Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();

  OlsFit fit;
  fit.names = names;
  fit.n = n;
  fit.k = k;
  fit.cov = cov;
  const Eigen::VectorXd fitted = x * beta;
  const Eigen::VectorXd resid = y - fitted;
  const Eigen::VectorXd lev = q.rowwise().squaredNorm();
  fit.beta.assign(beta.data(), beta.data() + ki);
  fit.fitted.assign(fitted.data(), fitted.data() + ni);
  fit.residuals.assign(resid.data(), resid.data() + ni);
  fit.leverage.assign(lev.data(), lev.data() + ni);

  fit.rss = resid.squaredNorm();
  const double mean_y = y.mean();
  fit.tss = (y.array() - mean_y).square().sum();
  const double df = static_cast<double>(n - k);
  fit.sigma2 = fit.rss / df;
  fit.r2 = fit.tss > 0 ? std::clamp(1.0 - fit.rss / fit.tss, 0.0, 1.0) : 0.0;
  fit.adj_r2 = fit.tss > 0 ? 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / df : 0.0;

  fit.se_classical.resize(k);
  for (std::size_t j = 0; j < k; ++j)
    fit.se_classical[j] = std::sqrt(fit.sigma2 * xtx_inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));

  fit.se_hc3.assign(k, std::numeric_limits<double>::quiet_NaN());
  bool hc3_defined = true;
  Eigen::VectorXd w(ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    const double one_minus_h = 1.0 - lev(i);
    if (one_minus_h <= 1e-12) {
      hc3_defined = false;
      break;
    }
    w(i) = resid(i) * resid(i) / (one_minus_h * one_minus_h);
  }
  if (hc3_defined) {
    const Eigen::MatrixXd meat = x.transpose() * w.asDiagonal() * x;
    const Eigen::MatrixXd sandwich = xtx_inv * meat * xtx_inv;
    for (std::size_t j = 0; j < k; ++j)
      fit.se_hc3[j] = std::sqrt(sandwich(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
  } else if (cov == Covariance::HC3) {
    throw DegenerateInputError("HC3 undefined: an observation has leverage 1");
  }

  const auto& se = cov == Covariance::HC3 ? fit.se_hc3 : fit.se_classical;
  fit.t_stats.resize(k);
  fit.p_values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    fit.t_stats[j] = detail::t_ratio(fit.beta[j], se[j]);
    fit.p_values[j] = detail::two_sided_p(fit.t_stats[j], df);
  }
  return fit;
}

/// Residual sum of squares only; used by the F-tests.
inline double ols_rss(const DesignMatrix& design) { return ols_fit(design).rss; }

}  // namespace restake::econ
