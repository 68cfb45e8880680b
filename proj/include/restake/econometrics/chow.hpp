#pragma once

#include <algorithm>
#include <string>

#include "restake/core/error.hpp"
#include "restake/econometrics/ols.hpp"
#include "restake/econometrics/test_result.hpp"

namespace restake::econ {

/// Known-date structural break test. The second regime starts at
/// `break_date`. F = ((RSS_p - RSS_1 - RSS_2) / k) / ((RSS_1 + RSS_2) / (n - 2k)).
/// Regressors constant within one regime are dropped from that regime's fit
/// with a note.
inline TestResult chow_test(const DesignMatrix& x, Date break_date) {
  const std::size_t n = x.n();
  const std::size_t k = x.k();
  const auto split_it = std::lower_bound(x.dates().begin(), x.dates().end(), break_date);
  const auto n1 = static_cast<std::size_t>(split_it - x.dates().begin());
  const std::size_t n2 = n - n1;
  if (n1 <= k || n2 <= k)
    throw InsufficientDataError("Chow test: break at " + break_date.iso() +
                                " leaves a regime with n <= k (" + std::to_string(n1) + " / " +
                                std::to_string(n2) + " rows, k=" + std::to_string(k) + ")");
  TestResult r;
  std::vector<std::string> notes;
  auto segment_rss = [&](const DesignMatrix& seg, const char* label) {
    auto cleaned = drop_degenerate_columns(seg);
    for (const auto& w : cleaned.warnings) notes.push_back(std::string(label) + ": " + w);
    return ols_fit(cleaned.matrix).rss;
  };
  const double rss_pooled = segment_rss(x, "pooled");
  const double rss1 = segment_rss(x.rows(0, n1), "regime 1");
  const double rss2 = segment_rss(x.rows(n1, n), "regime 2");
  const double df_num = static_cast<double>(k);
  const double df_den = static_cast<double>(n - 2 * k);
  const double f = ((rss_pooled - rss1 - rss2) / df_num) / ((rss1 + rss2) / df_den);
  r = make_result("Chow", f, f_sf(f, df_num, df_den));
  r.df_num = df_num;
  r.df_den = df_den;
  r.nobs = n;
  r.notes = std::move(notes);
  r.notes.push_back("break date " + break_date.iso());
  return r;
}

}  // namespace restake::econ
