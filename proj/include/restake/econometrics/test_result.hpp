#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace restake::econ {

inline constexpr std::array<double, 3> kConventionalLevels{0.10, 0.05, 0.01};

struct TestResult {
  std::string test_name;
  double statistic = 0;
  std::optional<double> df_num;
  std::optional<double> df_den;
  double p_value = 1;
  std::optional<int> lag;
  std::size_t nobs = 0;
  /// level -> p_value < level, for 0.10, 0.05, 0.01
  std::vector<std::pair<double, bool>> reject_at;
  /// Critical values keyed by level label ("1%", "5%", "10%"), when tabulated.
  std::map<std::string, double> critical_values;
  std::vector<std::string> notes;
  bool selected = false;

  bool rejects(double level) const {
    for (const auto& [l, r] : reject_at)
      if (l == level) return r;
    return p_value < level;
  }
};

inline TestResult make_result(std::string name, double statistic, double p_value) {
  TestResult r;
  r.test_name = std::move(name);
  r.statistic = statistic;
  r.p_value = std::clamp(p_value, 0.0, 1.0);
  for (double level : kConventionalLevels) r.reject_at.emplace_back(level, r.p_value < level);
  return r;
}

}  // namespace restake::econ
