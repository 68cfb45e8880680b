#pragma once

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace restake::econ {

/// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_sf(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
}

inline double student_t_two_sided(double t, double df) {
  return std::min(1.0, 2.0 * student_t_sf(std::fabs(t), df));
}

/// P(F > f) for the F(df1, df2) distribution.
inline double f_sf(double f, double df1, double df2) {
  if (std::isnan(f)) return 1.0;
  if (f <= 0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), f));
}

inline double normal_cdf(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::normal(), z);
}

}  // namespace restake::econ
