#include <gtest/gtest.h>

#include <cmath>

#include "restake/econometrics.hpp"
#include "support/sim.hpp"

using namespace restake;
using namespace restake::econ;

namespace {

// Deterministic series shared with the statsmodels reference values below.
std::vector<double> sine_walk(std::size_t n) {
  std::vector<double> x(n);
  double level = 0;
  for (std::size_t i = 0; i < n; ++i) x[i] = level += std::sin(1.7 * std::pow(static_cast<double>(i + 1), 1.3));
  return x;
}

std::vector<double> sine_ar(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = (i ? 0.5 * x[i - 1] : 0.0) + std::sin(1.7 * std::pow(static_cast<double>(i + 1), 1.3));
  return x;
}

}  // namespace

// Reference values from statsmodels adfuller(x, maxlag=14, autolag="AIC"); 14 is
// floor(12 (200/100)^(1/4)).
TEST(Adf, MatchesStatsmodelsConstant) {
  const auto r = adf_test(sine_walk(200));
  EXPECT_NEAR(r.statistic, -2.6677923117240616, 1e-9);
  EXPECT_NEAR(r.p_value, 0.079779340120887, 1e-9);
  EXPECT_EQ(*r.lag, 4);
  EXPECT_EQ(r.nobs, 195u);
  EXPECT_NEAR(r.critical_values.at("1%"), -3.464337030867007, 1e-12);
  EXPECT_NEAR(r.critical_values.at("5%"), -2.876478799035722, 1e-12);
  EXPECT_NEAR(r.critical_values.at("10%"), -2.574733103221565, 1e-12);
}

TEST(Adf, MatchesStatsmodelsConstantTrend) {
  const auto r = adf_test(sine_walk(200), std::nullopt, AdfSpec::ConstantTrend);
  EXPECT_NEAR(r.statistic, -2.087923084750244, 1e-9);
  EXPECT_NEAR(r.p_value, 0.5528526394503159, 1e-9);
  EXPECT_EQ(*r.lag, 4);
  EXPECT_NEAR(r.critical_values.at("1%"), -4.005961859943694, 1e-12);
  EXPECT_NEAR(r.critical_values.at("5%"), -3.433248624251926, 1e-12);
  EXPECT_NEAR(r.critical_values.at("10%"), -3.1404157270014665, 1e-12);
}

TEST(Adf, MatchesStatsmodelsStationaryAndExplicitMaxLag) {
  const auto r = adf_test(sine_ar(200));
  EXPECT_NEAR(r.statistic, -7.099205333650635, 1e-9);
  EXPECT_NEAR(r.p_value, 4.2109081013860867e-10, 1e-15);
  EXPECT_EQ(*r.lag, 3);
  const auto m = adf_test(sine_walk(200), 15);
  EXPECT_NEAR(m.statistic, -2.5235209701881716, 1e-9);
  EXPECT_NEAR(m.p_value, 0.10985579563940018, 1e-9);
  EXPECT_EQ(*m.lag, 2);
  EXPECT_EQ(m.nobs, 197u);
}

TEST(Adf, DegenerateAndShort) {
  EXPECT_THROW(adf_test(std::vector<double>(100, 2.0)), DegenerateInputError);
  EXPECT_THROW(adf_test(sine_walk(12), 2), InsufficientDataError);
  EXPECT_THROW(adf_test(std::vector<double>{}), InsufficientDataError);
}

TEST(Adf, MacKinnonSurfaceEdges) {
  EXPECT_DOUBLE_EQ(mackinnon_p(3.0, AdfSpec::ConstantOnly), 1.0);
  EXPECT_DOUBLE_EQ(mackinnon_p(-20.0, AdfSpec::ConstantOnly), 0.0);
  double prev = 0;
  for (double t = -18; t < 2.7; t += 0.05) {
    const double p = mackinnon_p(t, AdfSpec::ConstantOnly);
    EXPECT_GE(p, prev - 1e-12);
    prev = p;
  }
}

TEST(Adf, RandomWalkSizeAndAr1Power) {
  int rw_rejects = 0, ar_rejects = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    restake::Rng rng(seed);
    if (adf_test(sim::random_walk(rng, 500)).rejects(0.05)) ++rw_rejects;
    if (adf_test(sim::ar1(rng, 500, 0.5)).rejects(0.01)) ++ar_rejects;
  }
  EXPECT_LE(std::abs(rw_rejects - 5), 4);
  EXPECT_GE(ar_rejects, 99);
}

TEST(Granger, MatchesStatsmodels) {
  const std::size_t n = 200;
  std::vector<double> c(n), e(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = std::cos(0.9 * std::pow(static_cast<double>(i + 1), 1.1));
  for (std::size_t i = 0; i < n; ++i)
    e[i] = (i ? 0.5 * c[i - 1] : 0.0) + std::sin(2.3 * std::pow(static_cast<double>(i + 1), 1.2));
  const double f[] = {63.88879583675175, 29.091582686919594, 11.758674381460294};
  const double p[] = {1.110107454740063e-13, 9.061378376257738e-12, 4.2246193356913484e-07};
  const double df[] = {196, 193, 190};
  for (int l = 1; l <= 3; ++l) {
    const auto r = granger_test(c, e, l);
    EXPECT_NEAR(r.statistic, f[l - 1], 1e-8 * f[l - 1]);
    EXPECT_NEAR(r.p_value, p[l - 1], 1e-6 * p[l - 1]);
    EXPECT_EQ(*r.df_num, l);
    EXPECT_EQ(*r.df_den, df[l - 1]);
  }
}

TEST(Granger, FEqualsBruteForceRssRatio) {
  restake::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = sim::white_noise(rng, 150);
    const auto y = sim::lagged_response(rng, x, 1, 0.3);
    const int lag = 1 + static_cast<int>(rng.index(4));
    const double rss_r = ols_fit(detail::granger_design(x, y, lag, false)).rss;
    const double rss_u = ols_fit(detail::granger_design(x, y, lag, true)).rss;
    const double n_eff = 150.0 - lag;
    const double want = ((rss_r - rss_u) / lag) / (rss_u / (n_eff - 2.0 * lag - 1));
    EXPECT_NEAR(granger_test(x, y, lag).statistic, want, 1e-9 * std::max(1.0, want));
  }
}

TEST(Granger, DetectsLaggedDependence) {
  restake::Rng rng(32);
  const auto x = sim::white_noise(rng, 400);
  const auto y = sim::lagged_response(rng, x, 1, 0.8);
  EXPECT_LT(granger_test(x, y, 1).p_value, 0.01);
}

TEST(Granger, WhiteNoiseSize) {
  int rejects = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    restake::Rng rng(1000 + seed);
    const auto x = sim::white_noise(rng, 300);
    const auto y = sim::white_noise(rng, 300);
    if (granger_test(x, y, 1).rejects(0.05)) ++rejects;
  }
  EXPECT_GE(rejects, 2);
  EXPECT_LE(rejects, 18);
}

TEST(Granger, Preconditions) {
  const std::vector<double> a(30, 1.0);
  std::vector<double> b(30);
  for (std::size_t i = 0; i < 30; ++i) b[i] = std::sin(static_cast<double>(i));
  EXPECT_THROW(granger_test(b, b, 0), ValidationError);
  EXPECT_THROW(granger_test(b, a, 1), DegenerateInputError);
  EXPECT_THROW(granger_test(b, b, 10), InsufficientDataError);
  EXPECT_THROW(granger_test(b, std::vector<double>(29, 0.0), 1), ValidationError);
}

TEST(GrangerScan, SelectsConstructedLag) {
  restake::Rng rng(33);
  const auto x = sim::white_noise(rng, 400);
  const auto y = sim::lagged_response(rng, x, 4, 0.8);
  const auto scan = granger_scan(x, y, 5);
  ASSERT_EQ(scan.size(), 5u);
  EXPECT_EQ(*selected(scan).lag, 4);
  int flagged = 0;
  for (const auto& r : scan) flagged += r.selected;
  EXPECT_EQ(flagged, 1);
  EXPECT_FALSE(selected(scan).notes.empty());
}

TEST(GrangerScan, SingleLagAndWhiteNoise) {
  restake::Rng rng(34);
  const auto x = sim::white_noise(rng, 300);
  const auto y = sim::white_noise(rng, 300);
  const auto one = granger_scan(x, y, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].selected);
  int above = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    restake::Rng r(2000 + seed);
    const auto a = sim::white_noise(r, 300);
    const auto b = sim::white_noise(r, 300);
    if (selected(granger_scan(a, b, 5)).p_value > 0.05) ++above;
  }
  EXPECT_GE(above, 35);
}

TEST(Chow, DetectsInterceptJump) {
  restake::Rng rng(41);
  const auto d = sim::break_design(rng, 200, 10.0);
  const auto r = chow_test(d, d.dates()[100]);
  EXPECT_LT(r.p_value, 0.001);
  EXPECT_EQ(*r.df_num, 3);
  EXPECT_EQ(*r.df_den, 194);
}

TEST(Chow, SingleRegimeSize) {
  int rejects = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    restake::Rng rng(3000 + seed);
    const auto d = sim::break_design(rng, 200, 0.0);
    if (chow_test(d, d.dates()[100]).rejects(0.05)) ++rejects;
  }
  EXPECT_GE(rejects, 2);
  EXPECT_LE(rejects, 18);
}

TEST(Chow, BreakOutsideSampleIsInsufficient) {
  restake::Rng rng(42);
  const auto d = sim::break_design(rng, 50, 0.0);
  EXPECT_THROW(chow_test(d, d.dates()[0] - 10), InsufficientDataError);
  EXPECT_THROW(chow_test(d, d.dates()[2]), InsufficientDataError);
  EXPECT_THROW(chow_test(d, d.dates().back() + 1), InsufficientDataError);
}

TEST(Chow, DropsRegimeConstantDummy) {
  restake::Rng rng(43);
  auto base = sim::break_design(rng, 120, 0.0);
  std::vector<Column> cols = base.columns();
  std::vector<double> ev(120, 0.0);
  ev[5] = ev[7] = 1;
  cols.push_back({"Events", ev});
  const DesignMatrix d(base.dates(), base.y_name(), base.y(), cols);
  const auto r = chow_test(d, d.dates()[60]);
  EXPECT_TRUE(std::isfinite(r.statistic));
  bool noted = false;
  for (const auto& n : r.notes) noted |= n.find("Events") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(TestResult, RejectFlagsConsistentWithP) {
  for (double p : {0.0, 0.005, 0.01, 0.04, 0.05, 0.07, 0.1, 0.5}) {
    const auto r = make_result("x", 1.0, p);
    for (const auto& [level, flag] : r.reject_at) EXPECT_EQ(flag, p < level);
  }
  EXPECT_EQ(make_result("x", 1, 1.5).p_value, 1.0);
}

TEST(Report, GrangerTableScheme) {
  auto r = make_result("Granger", 10, 0.0047);
  r.lag = 1;
  const auto text = granger_table({{"FGI", r}});
  EXPECT_NE(text.find("0.0047***"), std::string::npos);
  EXPECT_NE(text.find(kGrangerLegend), std::string::npos);
}
