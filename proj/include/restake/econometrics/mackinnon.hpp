#pragma once

// MacKinnon response surfaces for the Dickey-Fuller tau statistic (one I(1)
// series): approximate asymptotic p-values (MacKinnon 1994) and finite-sample
// critical values (MacKinnon 2010).

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "restake/econometrics/distributions.hpp"

namespace restake::econ {

enum class AdfSpec { ConstantOnly, ConstantTrend };

namespace mackinnon {

struct PValueSurface {
  double tau_min;
  double tau_star;
  double tau_max;
  std::array<double, 3> small;  // polynomial in tau, ascending powers
  std::array<double, 4> large;
};

inline constexpr PValueSurface kConstant{
    -18.83, -1.61, 2.74, {2.1659, 1.4412, 3.8269e-2}, {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}};
inline constexpr PValueSurface kConstantTrend{
    -16.18, -2.89, 0.7, {3.2512, 1.6047, 4.9588e-2}, {2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2}};

/// Rows: 1%, 5%, 10%; columns: c0 + c1/T + c2/T^2 + c3/T^3.
inline constexpr std::array<std::array<double, 4>, 3> kCritConstant{{
    {-3.43035, -6.5393, -16.786, -79.433},
    {-2.86154, -2.8903, -4.234, -40.040},
    {-2.56677, -1.5384, -2.809, 0},
}};
inline constexpr std::array<std::array<double, 4>, 3> kCritConstantTrend{{
    {-3.95877, -9.0531, -28.428, -134.155},
    {-3.41049, -4.3904, -9.036, -45.374},
    {-3.12705, -2.5856, -3.925, -22.380},
}};

}  // namespace mackinnon

inline double mackinnon_p(double tau, AdfSpec spec) {
  const auto& s = spec == AdfSpec::ConstantOnly ? mackinnon::kConstant : mackinnon::kConstantTrend;
  if (tau > s.tau_max) return 1.0;
  if (tau < s.tau_min) return 0.0;
  double z = 0;
  if (tau <= s.tau_star) {
    z = s.small[0] + tau * (s.small[1] + tau * s.small[2]);
  } else {
    z = s.large[0] + tau * (s.large[1] + tau * (s.large[2] + tau * s.large[3]));
  }
  return normal_cdf(z);
}

inline std::map<std::string, double> mackinnon_critical_values(AdfSpec spec, std::size_t nobs) {
  const auto& t = spec == AdfSpec::ConstantOnly ? mackinnon::kCritConstant : mackinnon::kCritConstantTrend;
  const double inv = 1.0 / static_cast<double>(nobs);
  auto eval = [&](const std::array<double, 4>& c) {
    return c[0] + inv * (c[1] + inv * (c[2] + inv * c[3]));
  };
  return {{"1%", eval(t[0])}, {"5%", eval(t[1])}, {"10%", eval(t[2])}};
}

}  // namespace restake::econ
