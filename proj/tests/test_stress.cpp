#include <gtest/gtest.h>

#include <cmath>

#include "restake/core/io.hpp"
#include "restake/core/rng.hpp"
#include "restake/stress.hpp"

using namespace restake;
using namespace restake::stress;

namespace {

const LendingParams kLinea{0.725, 0.75};

ScenarioConfig linea_config() {
  return scenario_from_json(nlohmann::json::parse(
      read_file(std::filesystem::path(RESTAKE_SOURCE_DIR) / "scenarios/paper_linea_2025-10-04.json")));
}

LendingParams random_params(Rng& rng) {
  for (;;) {
    const double a = 0.01 + 0.98 * rng.uniform(), b = 0.01 + 0.98 * rng.uniform();
    if (a < b) return {a, b};
    if (b < a) return {b, a};
  }
}

}  // namespace

TEST(MaxDebt, Examples) {
  EXPECT_NEAR(max_debt(64890, 0.725), 47045.25, 1e-9);
  EXPECT_DOUBLE_EQ(max_debt(0, 0.725), 0.0);
  EXPECT_LT(max_debt(1000, 1e-12), 1e-8);
  EXPECT_THROW(max_debt(-1, 0.5), ValidationError);
}

TEST(HealthFactor, Examples) {
  EXPECT_NEAR(health_factor(1.0 / 30.0, kLinea), 1.0, 1e-12);
  EXPECT_NEAR(health_factor(0, kLinea), 0.75 / 0.725, 1e-15);
  EXPECT_DOUBLE_EQ(health_factor(1, kLinea), 0.0);
  EXPECT_THROW(health_factor(0.1, LendingParams{0.8, 0.75}), ValidationError);
}

TEST(CriticalDepeg, Examples) {
  EXPECT_NEAR(critical_depeg(kLinea), 1.0 / 30.0, 1e-15);
  EXPECT_NEAR(critical_depeg(kLinea) * 100, 3.33, 0.005);
  EXPECT_DOUBLE_EQ(critical_depeg({0.5, 0.99}), 1 - 0.5 / 0.99);
  EXPECT_THROW(critical_depeg({0.5, 0.5}), ValidationError);
  EXPECT_THROW(critical_depeg({0.5, 1.0}), ValidationError);
}

TEST(HealthFactor, CriticalDepegIsUnitBoundary) {
  Rng rng(101);
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_params(rng);
    ASSERT_NEAR(health_factor(critical_depeg(p), p), 1.0, 1e-12);
  }
}

TEST(HealthFactor, AffineDecreasingWithSlope) {
  Rng rng(102);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_params(rng);
    const double d = 0.9 * rng.uniform(), h = 1e-4;
    const double slope = (health_factor(d + h, p) - health_factor(d, p)) / h;
    EXPECT_NEAR(slope, -p.lt / p.ltv, 1e-9 * std::max(1.0, p.lt / p.ltv));
    EXPECT_LT(health_factor(d + h, p), health_factor(d, p));
  }
}

TEST(CoverageRatio, Examples) {
  EXPECT_EQ(ratio_text(coverage_ratio(149, 64890)), "0.0023 (0.23%)");
  EXPECT_EQ(ratio_text(coverage_ratio(5251, 64890)), "0.0809 (8.09%)");
  EXPECT_DOUBLE_EQ(coverage_ratio(7, 7), 1.0);
  EXPECT_GT(coverage_ratio(10, 5), 1.0);
  EXPECT_THROW(coverage_ratio(1, 0), UndefinedRatioError);
}

TEST(RunScenario, LineaFixture) {
  const auto c = linea_config();
  const auto r = run_scenario(c);
  EXPECT_TRUE(r.liquidatable);
  EXPECT_NEAR(r.debt, 47045.25, 1e-9);
  EXPECT_DOUBLE_EQ(r.liquidated_volume, 64890.0);
  EXPECT_EQ(format_fixed(r.local_coverage * 100, 2), "0.23");
  EXPECT_EQ(format_fixed(r.mainnet_coverage * 100, 2), "8.09");
  EXPECT_EQ(format_fixed(r.lsp_unwind * 100, 2), "0.76");
  EXPECT_EQ(format_fixed(r.critical_depeg * 100, 2), "3.33");
  ASSERT_EQ(r.stages.size(), 4u);
  EXPECT_EQ(r.stages[0].name, "local_dex");
  EXPECT_DOUBLE_EQ(r.stages[0].absorbed, 149.0);
  EXPECT_DOUBLE_EQ(r.stages[2].absorbed, 5251.0);
}

TEST(RunScenario, GraphLabelsStages) {
  const auto g = flow::load_graph(flow::BundledFixture{"fig5_2025-10-04"});
  const auto r = run_scenario(g, linea_config());
  EXPECT_EQ(r.stages[0].nodes, std::vector<std::string>{"DexPool@Linea"});
  EXPECT_EQ(r.stages[1].nodes, std::vector<std::string>{"ezETH@Linea"});
  EXPECT_EQ(r.stages[3].nodes, std::vector<std::string>{"Lido"});
  const auto derived = scenario_from_graph(g, "linea", kLinea, 0.04);
  EXPECT_DOUBLE_EQ(derived.collateral, 64890.0);
  EXPECT_DOUBLE_EQ(derived.local_dex_liquidity, 149.0);
  EXPECT_DOUBLE_EQ(derived.mainnet_liquidity, 5251.0);
  EXPECT_DOUBLE_EQ(derived.lsp_stake, 8493457.0);
}

TEST(RunScenario, NoShock) {
  auto c = linea_config();
  c.depeg = 0;
  const auto r = run_scenario(c);
  EXPECT_FALSE(r.liquidatable);
  EXPECT_DOUBLE_EQ(r.liquidated_volume, 0.0);
  for (const auto& s : r.stages) EXPECT_DOUBLE_EQ(s.inflow, 0.0);
}

TEST(RunScenario, LocalLiquidityCoversAll) {
  auto c = linea_config();
  c.local_dex_liquidity = 100000;
  const auto r = run_scenario(c);
  EXPECT_DOUBLE_EQ(r.stages[0].residual, 0.0);
  EXPECT_DOUBLE_EQ(r.stages[2].inflow, 0.0);
}

TEST(RunScenario, StageChainingAndConservation) {
  Rng rng(103);
  for (int i = 0; i < 2000; ++i) {
    ScenarioConfig c;
    c.params = random_params(rng);
    c.collateral = 1 + rng.uniform() * 1e6;
    c.depeg = 0.999 * rng.uniform();
    c.local_dex_liquidity = rng.uniform() * 1e5;
    c.mainnet_liquidity = rng.uniform() * 1e6;
    c.lsp_stake = 1 + rng.uniform() * 1e7;
    const auto r = run_scenario(c);
    ASSERT_EQ(r.liquidatable, r.health_factor < 1.0);
    double absorbed = 0;
    for (std::size_t k = 0; k < r.stages.size(); ++k) {
      if (k + 1 < r.stages.size()) {
        ASSERT_EQ(r.stages[k].residual, r.stages[k + 1].inflow);
      }
      absorbed += r.stages[k].absorbed;
    }
    EXPECT_NEAR(absorbed + r.stages.back().residual, r.liquidated_volume, 1e-9 * (1 + r.liquidated_volume));
  }
}

TEST(RunScenario, PureAndScaleInvariant) {
  const auto c = linea_config();
  EXPECT_EQ(to_json(run_scenario(c)).dump(), to_json(run_scenario(c)).dump());
  const auto base = run_scenario(c);
  for (double k : {0.001, 3.0, 1e6}) {
    auto s = c;
    s.collateral *= k;
    s.local_dex_liquidity *= k;
    s.mainnet_liquidity *= k;
    s.lsp_stake *= k;
    const auto r = run_scenario(s);
    EXPECT_NEAR(r.local_coverage, base.local_coverage, 1e-12);
    EXPECT_NEAR(r.mainnet_coverage, base.mainnet_coverage, 1e-12);
    EXPECT_NEAR(r.lsp_unwind, base.lsp_unwind, 1e-12);
  }
}

TEST(RunScenario, ExplicitDebt) {
  auto c = linea_config();
  c.assume_max_ltv = false;
  EXPECT_THROW(run_scenario(c), ValidationError);
  c.debt = 30000;
  const auto r = run_scenario(c);
  EXPECT_NEAR(r.health_factor, 0.96 * 64890 * 0.75 / 30000, 1e-12);
  EXPECT_FALSE(r.liquidatable);
}

TEST(RunScenario, InvalidConfig) {
  auto c = linea_config();
  c.depeg = 1.0;
  EXPECT_THROW(run_scenario(c), ValidationError);
  c.depeg = 0.1;
  c.lsp_stake = 0;
  EXPECT_THROW(run_scenario(c), ValidationError);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"ltv":0.7})")), ValidationError);
}

TEST(SweepDepeg, ThreePointGrid) {
  const auto c = linea_config();
  const double ds = critical_depeg(c.params);
  const auto out = sweep_depeg(c, {0, ds, 2 * ds});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(format_fixed(out[0].second.health_factor, 4), "1.0345");
  EXPECT_EQ(format_fixed(out[1].second.health_factor, 4), "1.0000");
  EXPECT_EQ(format_fixed(out[2].second.health_factor, 4), "0.9655");
}

TEST(SweepDepeg, EmptyUnsortedAndBoundary) {
  const auto c = linea_config();
  EXPECT_TRUE(sweep_depeg(c, {}).empty());
  EXPECT_THROW(sweep_depeg(c, {0.2, 0.1}), ValidationError);
  EXPECT_THROW(sweep_depeg(c, {0.1, 0.1}), ValidationError);
  const auto at = sweep_depeg(c, {critical_depeg(c.params)});
  EXPECT_EQ(at[0].second.liquidatable, at[0].second.health_factor < 1.0);
  const auto rounded = sweep_depeg(c, {0.0333});
  EXPECT_FALSE(rounded[0].second.liquidatable);
  const auto grid = linear_grid(0, 0.2, 41);
  const auto curve = sweep_depeg(c, grid);
  for (std::size_t i = 1; i < curve.size(); ++i)
    EXPECT_LT(curve[i].second.health_factor, curve[i - 1].second.health_factor);
}

TEST(RenderText, ShowsRatiosAndCriticalDepeg) {
  const auto c = linea_config();
  const auto text = render_text(c, run_scenario(c));
  EXPECT_NE(text.find("0.0023 (0.23%)"), std::string::npos);
  EXPECT_NE(text.find("0.0809 (8.09%)"), std::string::npos);
  EXPECT_NE(text.find("0.0076 (0.76%)"), std::string::npos);
  EXPECT_NE(text.find("0.0333 (3.33%)"), std::string::npos);
}
