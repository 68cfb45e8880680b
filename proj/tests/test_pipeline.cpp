#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "restake/core/hash.hpp"
#include "restake/core/io.hpp"
#include "restake/core/rng.hpp"
#include "restake/econometrics.hpp"
#include "restake/pipeline.hpp"

using namespace restake;
using namespace restake::pipeline;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(RESTAKE_SOURCE_DIR) / "fixtures";

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("restake_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Serves canned responses and records what was asked.
class FakeTransport : public HttpTransport {
 public:
  std::vector<HttpResponse> script;
  bool fail_network = false;
  std::vector<HttpRequest> seen;

  HttpResponse send(const HttpRequest& r) override {
    std::lock_guard lock(mu_);
    seen.push_back(r);
    if (fail_network) throw NetworkError("connection refused");
    if (script.empty()) return {200, body_for(r)};
    auto next = script.front();
    if (script.size() > 1) script.erase(script.begin());
    return next;
  }

  std::function<std::string(const HttpRequest&)> body_for = [](const HttpRequest&) { return std::string("{}"); };

 private:
  std::mutex mu_;
};

class ForbiddenTransport : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& r) override { throw std::logic_error("network used for " + r.url); }
};

FetchOptions options(const fs::path& cache, std::shared_ptr<HttpTransport> t, std::vector<long>* sleeps = nullptr) {
  FetchOptions o;
  o.cache_dir = cache;
  o.transport = std::move(t);
  o.sleep = [sleeps](std::chrono::milliseconds d) {
    if (sleeps) sleeps->push_back(static_cast<long>(d.count()));
  };
  o.clock = [] { return std::string("2025-04-18T00:00:00Z"); };
  o.politeness = std::chrono::milliseconds(0);
  return o;
}

Panel fixture_panel() { return align_daily(load_panel_csv(kFixtures / "synthetic_panel.csv")); }

RawSeries random_series(Rng& rng, const std::string& name) {
  RawSeries s{name, {}, "USD", "2025-01-01T00:00:00Z"};
  Date d(2024, 1, 1);
  const auto n = 1 + rng.index(60);
  for (std::uint64_t i = 0; i < n; ++i) {
    d = d + static_cast<long long>(1 + rng.index(3));
    s.add(d, rng.normal() * std::pow(10.0, static_cast<double>(rng.index(12)) - 6.0));
  }
  return s;
}

Panel constant_panel(std::size_t rows, Date start = Date(2024, 1, 15)) {
  Panel p;
  for (std::size_t i = 0; i < rows; ++i) p.dates.push_back(start + static_cast<long long>(i));
  for (const char* c : {raw::kRevenue, raw::kTvlEigenlayer, raw::kTvlRenzoEthereum, raw::kTvlRenzoL2,
                        raw::kEzethYield, raw::kEzethPrice, raw::kEthPrice, raw::kEzethSupply,
                        raw::kLrpTotalSupply, raw::kStethApy, raw::kTxFee, raw::kFgi})
    p.columns[c] = std::vector<double>(rows, 2.0);
  p.columns[raw::kLrpTotalSupply] = std::vector<double>(rows, 10.0);
  return p;
}

}  // namespace

// ---------------------------------------------------------------- series

TEST(RawSeries, RejectsDuplicatesAndNonFinite) {
  RawSeries s{"x", {}, "", ""};
  s.add(Date(2024, 1, 1), 1.0);
  EXPECT_THROW(s.add(Date(2024, 1, 1), 2.0), DataError);
  EXPECT_THROW(s.add(Date(2024, 1, 2), std::nan("")), DataError);
  EXPECT_THROW(s.add(Date(2024, 1, 2), INFINITY), DataError);
}

TEST(RawSeries, JsonAndCsvRoundTripIsIdentity) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_series(rng, "s" + std::to_string(trial));
    EXPECT_EQ(raw_series_from_json(nlohmann::json::parse(to_json(s).dump())), s);
    auto back = raw_series_from_csv(to_csv(s));
    back.units = s.units;
    back.retrieved_at = s.retrieved_at;
    EXPECT_EQ(back, s);
  }
}

TEST(PanelCsv, RejectsCommaDecimalsAndRaggedRows) {
  EXPECT_THROW(read_panel_csv("date,a\n2024-01-01,1,5\n"), DataError);
  EXPECT_THROW(read_panel_csv("date,a\n2024-01-01,1;5\n"), DataError);
  EXPECT_THROW(read_panel_csv("date,a,a\n2024-01-01,1,2\n"), DataError);
  EXPECT_THROW(read_panel_csv("date,a\n2024-01-01,1\n2024-01-01,2\n"), DataError);
  const auto s = read_panel_csv("date,a,b\n2024-01-01,1.5,\n2024-01-02,,2\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].points.size(), 1u);
  EXPECT_EQ(s[1].points.at(Date(2024, 1, 2)), 2.0);
}

// ---------------------------------------------------------------- fetch

TEST(Descriptor, TemplatesParseAndValidate) {
  std::size_t n = 0;
  std::set<std::string> series;
  for (const auto& e : fs::directory_iterator(kFixtures / "sources")) {
    const auto d = load_descriptor(e.path());
    EXPECT_EQ(d.source_id + ".json", e.path().filename().string());
    EXPECT_EQ(descriptor_from_json(to_json(d)).series_name, d.series_name);
    series.insert(d.series_name);
    ++n;
  }
  EXPECT_GE(n, 15u);
  for (const char* c : {raw::kRevenue, raw::kTvlEigenlayer, raw::kTvlRenzoEthereum, raw::kEzethYield,
                        raw::kEzethPrice, raw::kEthPrice, raw::kEzethSupply, raw::kLrpTotalSupply,
                        raw::kStethApy, raw::kTxFee, raw::kFgi})
    EXPECT_TRUE(series.contains(c)) << c;
  for (const auto& chain : l2_chains()) EXPECT_TRUE(series.contains(std::string(raw::kTvlRenzoL2Prefix) + chain));
}

TEST(Descriptor, ValidationErrors) {
  auto j = nlohmann::json::parse(read_file(kFixtures / "sources/defillama_steth_apy.json"));
  j["transport"] = "Carrier";
  EXPECT_THROW(descriptor_from_json(j), ValidationError);
  j["transport"] = "RestJson";
  j["endpoint_or_path"] = "ftp://x";
  EXPECT_THROW(descriptor_from_json(j), ValidationError);
  j["endpoint_or_path"] = "https://x";
  j.erase("cache_key");
  EXPECT_THROW(descriptor_from_json(j), ValidationError);
}

TEST(Fetch, LocalCsvFixtureNeverTouchesNetwork) {
  const auto cache = fresh_dir("local");
  const auto d = load_descriptor(kFixtures / "sources/local_steth_apy.json");
  for (bool offline : {false, true}) {
    auto opt = options(cache, std::make_shared<ForbiddenTransport>());
    opt.offline = offline;
    const auto s = fetch_series(d, opt);
    EXPECT_EQ(s.series_name, "steth_apy");
    EXPECT_EQ(s.points.size(), 459u);
    const auto panel = synthetic_panel();
    EXPECT_EQ(s.points.at(Date(2024, 3, 1)), panel.at(raw::kStethApy)[static_cast<std::size_t>(Date(2024, 3, 1) - kSyntheticStart)]);
  }
  EXPECT_FALSE(fs::exists(cache / "manifest.json"));
}

TEST(Fetch, OfflineWithEmptyCacheIsCacheMiss) {
  const auto cache = fresh_dir("miss");
  auto opt = options(cache, std::make_shared<ForbiddenTransport>());
  opt.offline = true;
  const auto d = load_descriptor(kFixtures / "sources/defillama_steth_apy.json");
  EXPECT_THROW(fetch_series(d, opt), CacheMissError);
  opt.refresh = true;
  EXPECT_THROW(fetch_series(d, opt), CacheMissError);
}

TEST(Fetch, ReplayOfRecordedPayloadThenCacheHit) {
  const auto cache = fresh_dir("replay");
  const std::string body = read_file(kFixtures / "recorded/defillama_steth_apy.json");
  // independent parse of the recording
  std::map<Date, double> expected;
  const auto recording = nlohmann::json::parse(body);
  for (const auto& r : recording["data"])
    expected[Date::parse(r["timestamp"].get<std::string>().substr(0, 10))] = r["apy"].get<double>();
  ASSERT_EQ(expected.size(), 459u);

  auto fake = std::make_shared<FakeTransport>();
  fake->script = {{200, body}};
  const auto d = load_descriptor(kFixtures / "sources/defillama_steth_apy.json");
  const auto s = fetch_series(d, options(cache, fake));
  EXPECT_EQ(s.points, expected);
  EXPECT_EQ(s.retrieved_at, "2025-04-18T00:00:00Z");
  ASSERT_EQ(fake->seen.size(), 1u);
  EXPECT_EQ(fake->seen[0].method, "GET");
  EXPECT_EQ(fake->seen[0].url, d.endpoint_or_path);

  EXPECT_TRUE(fs::exists(cache / "objects" / (sha256_hex(body) + ".json")));
  const auto manifest = nlohmann::json::parse(read_file(cache / "manifest.json"));
  EXPECT_EQ(manifest[d.cache_key]["object"], sha256_hex(body));

  auto opt = options(cache, std::make_shared<ForbiddenTransport>());
  opt.offline = true;
  EXPECT_EQ(fetch_series(d, opt), s);
  opt.offline = false;
  EXPECT_EQ(fetch_series(d, opt), s);

  opt.refresh = true;
  opt.transport = fake;
  fake->script = {{200, R"({"data":[{"timestamp":"2024-01-01T00:00:00Z","apy":"3.5"}]})"}};
  const auto refreshed = fetch_series(d, opt);
  EXPECT_EQ(refreshed.points.size(), 1u);
  EXPECT_EQ(refreshed.points.begin()->second, 3.5);
  EXPECT_EQ(fake->seen.size(), 2u);
}

TEST(Fetch, SchemaMismatchIsDataError) {
  const auto cache = fresh_dir("schema");
  const auto d = load_descriptor(kFixtures / "sources/defillama_steth_apy.json");
  for (const char* body : {"not json", R"({"rows":[]})", R"({"data":{"a":1}})",
                           R"({"data":[{"timestamp":"2024-01-01"}]})",
                           R"({"data":[{"timestamp":"2024-01-01","apy":"3,5"}]})",
                           R"({"data":[{"timestamp":"2024-01-01","apy":1},{"timestamp":"2024-01-01","apy":2}]})"}) {
    auto fake = std::make_shared<FakeTransport>();
    fake->script = {{200, body}};
    EXPECT_THROW(fetch_series(d, options(cache, fake)), DataError) << body;
  }
  EXPECT_FALSE(fs::exists(cache / "manifest.json"));
}

TEST(Fetch, RetriesWithBoundedBackoff) {
  const auto d = load_descriptor(kFixtures / "sources/defillama_steth_apy.json");
  const std::string ok = R"({"data":[{"timestamp":"2024-01-01","apy":1}]})";
  {
    std::vector<long> sleeps;
    auto fake = std::make_shared<FakeTransport>();
    fake->script = {{503, ""}, {429, ""}, {200, ok}};
    EXPECT_EQ(fetch_series(d, options(fresh_dir("retry1"), fake, &sleeps)).points.size(), 1u);
    EXPECT_EQ(sleeps, (std::vector<long>{250, 500}));
  }
  {
    std::vector<long> sleeps;
    auto fake = std::make_shared<FakeTransport>();
    fake->fail_network = true;
    EXPECT_THROW(fetch_series(d, options(fresh_dir("retry2"), fake, &sleeps)), NetworkError);
    EXPECT_EQ(fake->seen.size(), 4u);
    EXPECT_EQ(sleeps, (std::vector<long>{250, 500, 1000}));
  }
  {
    std::vector<long> sleeps;
    auto fake = std::make_shared<FakeTransport>();
    fake->script = {{404, ""}};
    EXPECT_THROW(fetch_series(d, options(fresh_dir("retry3"), fake, &sleeps)), NetworkError);
    EXPECT_EQ(fake->seen.size(), 1u);
    EXPECT_TRUE(sleeps.empty());
  }
  RetryPolicy p;
  p.max_attempts = 10;
  EXPECT_EQ(p.delay_after(1).count(), 250);
  EXPECT_EQ(p.delay_after(9).count(), 4000);
}

TEST(Fetch, GraphQueryPostsDocumentAndVariables) {
  ::setenv("THEGRAPH_API_KEY", "k123", 1);
  ::setenv("EIGENLAYER_SUBGRAPH_ID", "sg", 1);
  const auto d = load_descriptor(kFixtures / "sources/thegraph_eigenlayer_tvl.json");
  auto fake = std::make_shared<FakeTransport>();
  fake->script = {{200, R"({"data":{"financialsDailySnapshots":[{"timestamp":"1705363200","totalValueLockedUSD":"12.5"}]}})"}};
  const auto s = fetch_series(d, options(fresh_dir("graph"), fake));
  EXPECT_EQ(s.points.at(Date(2024, 1, 16)), 12.5);
  ASSERT_EQ(fake->seen.size(), 1u);
  const auto& req = fake->seen[0];
  EXPECT_EQ(req.method, "POST");
  EXPECT_EQ(req.url, "https://gateway.thegraph.com/api/k123/subgraphs/id/sg");
  const auto body = nlohmann::json::parse(req.body);
  EXPECT_EQ(body["query"], d.query);
  EXPECT_EQ(body["variables"]["first"], 1000);

  fake->script = {{200, R"({"errors":[{"message":"bad"}]})"}};
  auto opt = options(fresh_dir("graph2"), fake);
  EXPECT_THROW(fetch_series(d, opt), DataError);
}

TEST(Fetch, RestParamsEncodedAndHeadersExpanded) {
  ::setenv("DUNE_API_KEY", "secret", 1);
  const auto d = load_descriptor(kFixtures / "sources/dune_ezeth_yield.json");
  const auto req = build_request(d);
  EXPECT_NE(req.url.find("?limit=5000"), std::string::npos);
  EXPECT_EQ(req.headers.at("X-Dune-API-Key"), "secret");
  EXPECT_EQ(expand_env("a${RESTAKE_TEST_UNSET_VAR}b"), "ab");
}

TEST(Fetch, LoopbackServerReplay) {
  const std::string body = read_file(kFixtures / "recorded/defillama_steth_apy.json");
  httplib::Server server;
  server.Get("/chart/steth", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(body, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto d = load_descriptor(kFixtures / "sources/defillama_steth_apy.json");
  d.endpoint_or_path = "http://127.0.0.1:" + std::to_string(port) + "/chart/steth";
  auto opt = options(fresh_dir("loopback"), std::make_shared<HttplibTransport>(std::chrono::seconds(5)));
  const auto s = fetch_series(d, opt);
  server.stop();
  th.join();

  EXPECT_EQ(s.points, parse_payload(d, body, "").points);
  EXPECT_EQ(s.points.size(), 459u);
}

TEST(Fetch, AllKeepsInputOrderAndSurfacesFirstError) {
  std::vector<SourceDescriptor> ds;
  for (int i = 0; i < 9; ++i) {
    SourceDescriptor d;
    d.source_id = "s" + std::to_string(i);
    d.transport = TransportKind::RestJson;
    d.endpoint_or_path = "https://host" + std::to_string(i % 3) + ".example/v?i=" + std::to_string(i);
    d.cache_key = d.source_id;
    d.series_name = d.source_id;
    d.mapping.records_path = "data";
    ds.push_back(d);
  }
  auto fake = std::make_shared<FakeTransport>();
  fake->body_for = [](const HttpRequest& r) {
    const auto i = r.url.substr(r.url.find("i=") + 2);
    return R"({"data":[{"date":"2024-01-01","value":)" + i + "}]}";
  };
  auto opt = options(fresh_dir("all"), fake);
  opt.max_parallel = 3;
  opt.politeness = std::chrono::milliseconds(5);
  const auto out = fetch_all(ds, opt);
  ASSERT_EQ(out.size(), ds.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].series_name, ds[i].series_name);
    EXPECT_EQ(out[i].points.begin()->second, static_cast<double>(i));
  }
  const auto manifest = nlohmann::json::parse(read_file(opt.cache_dir / "manifest.json"));
  EXPECT_EQ(manifest.size(), ds.size());

  ds[4].mapping.records_path = "missing";
  ds[7].mapping.records_path = "missing";
  opt.refresh = true;
  try {
    fetch_all(ds, opt);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'s4'"), std::string::npos);
  }
}

// ---------------------------------------------------------------- align

TEST(Align, FullCoverageGives452Rows) {
  const auto series = load_panel_csv(kFixtures / "synthetic_panel.csv");
  const auto p = align_daily(series, Date(2024, 1, 22), Date(2025, 4, 17));
  EXPECT_EQ(p.rows(), 452u);
  EXPECT_TRUE(p.fill_counts.empty());
  for (std::size_t i = 1; i < p.rows(); ++i) EXPECT_EQ(p.dates[i] - p.dates[i - 1], 1);
}

TEST(Align, GapErrorsUnlessForwardFilled) {
  auto series = load_panel_csv(kFixtures / "synthetic_panel.csv");
  auto& fee = *std::find_if(series.begin(), series.end(), [](const RawSeries& s) { return s.series_name == raw::kTxFee; });
  const double before = fee.points.at(Date(2024, 6, 1));
  fee.points.erase(Date(2024, 6, 2));
  try {
    align_daily(series, Date(2024, 1, 22), Date(2025, 4, 17));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2024-06-02"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("tx_fee"), std::string::npos);
  }
  const auto p = align_daily(series, Date(2024, 1, 22), Date(2025, 4, 17), {.ffill = true});
  EXPECT_EQ(p.rows(), 452u);
  EXPECT_EQ(p.fill_counts, (std::map<std::string, std::size_t>{{"tx_fee", 1}}));
  EXPECT_EQ(p.at(raw::kTxFee)[static_cast<std::size_t>(Date(2024, 6, 2) - Date(2024, 1, 22))], before);
  EXPECT_EQ(engineer_features(p).fill_counts.at("tx_fee"), 1u);
}

TEST(Align, LeadingGapCannotBeFilled) {
  RawSeries a{"a", {{Date(2024, 1, 2), 1.0}}, "", ""};
  EXPECT_THROW(align_daily({a}, Date(2024, 1, 1), Date(2024, 1, 2), {.ffill = true}), DataError);
}

TEST(Align, OverlappingDuplicateSeriesRejectedDisjointMerged) {
  RawSeries a{"a", {{Date(2024, 1, 1), 1.0}, {Date(2024, 1, 2), 2.0}}, "", ""};
  RawSeries b{"a", {{Date(2024, 1, 2), 9.0}}, "", ""};
  RawSeries c{"a", {{Date(2024, 1, 3), 3.0}}, "", ""};
  EXPECT_THROW(align_daily({a, b}, Date(2024, 1, 1), Date(2024, 1, 2)), DataError);
  EXPECT_EQ(align_daily({a, c}, Date(2024, 1, 1), Date(2024, 1, 3)).at("a"), (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(align_daily({a}, Date(2024, 1, 2), Date(2024, 1, 1)), ValidationError);
}

// ---------------------------------------------------------------- features

TEST(Features, FixtureFrameShapeAndProvenance) {
  const auto f = engineer_features(fixture_panel());
  EXPECT_EQ(f.input_rows, 459u);
  EXPECT_EQ(f.warmup_dropped, 7u);
  EXPECT_EQ(f.rows(), 452u);
  EXPECT_EQ(f.design.dates().front(), Date(2024, 1, 22));
  EXPECT_EQ(f.design.dates().back(), Date(2025, 4, 17));
  EXPECT_EQ(f.design.y_name(), "Revenue");
  std::vector<std::string> names;
  for (const auto& c : f.design.columns()) names.push_back(c.name);
  EXPECT_EQ(names, feature_names());
  EXPECT_EQ(f.transforms.at("Revenue"), (std::vector<std::string>{"log"}));
  EXPECT_EQ(f.transforms.at("TVL1"), (std::vector<std::string>{"log", "diff"}));
  EXPECT_EQ(f.transforms.at("TVL2"), (std::vector<std::string>{"sum", "log"}));
  EXPECT_EQ(f.transforms.at("ETH"), (std::vector<std::string>{"log", "diff"}));
  EXPECT_EQ(f.transforms.at("TxFee"), (std::vector<std::string>{"log", "diff", "roll_std_7"}));
  EXPECT_EQ(f.transforms.at("FGI"), (std::vector<std::string>{"diff"}));
  EXPECT_EQ(f.transforms.at("Premium"), (std::vector<std::string>{"pct_dev"}));
  EXPECT_EQ(f.transforms.at("Events"), (std::vector<std::string>{"dummy"}));
  EXPECT_EQ(f.transforms.size(), 12u);
}

TEST(Features, LogRoutedColumnsArePositiveInFixture) {
  const auto p = fixture_panel();
  for (const auto& [name, v] : p.columns) {
    const bool logged = name == raw::kRevenue || name.rfind("tvl_", 0) == 0 || name == raw::kEthPrice ||
                        name == raw::kTxFee || name == raw::kEzethPrice;
    if (!logged) continue;
    EXPECT_GT(*std::min_element(v.begin(), v.end()), 0.0) << name;
  }
}

TEST(Features, TransformsMatchIndependentComputation) {
  const auto p = fixture_panel();
  const auto f = engineer_features(p);
  for (std::size_t r = 0; r < f.rows(); r += 37) {
    const std::size_t i = r + 7;
    double l2 = 0;
    for (const auto& chain : l2_chains()) l2 += p.at(std::string("tvl_renzo_l2_") + chain)[i];
    EXPECT_NEAR(f.design.column("TVL2").values[r], std::log(l2), 1e-12);
    EXPECT_NEAR(f.design.y()[r], std::log(p.at("revenue")[i]), 1e-12);
    EXPECT_NEAR(f.design.column("TVL1").values[r],
                std::log(p.at("tvl_renzo_ethereum")[i] / p.at("tvl_renzo_ethereum")[i - 1]), 1e-12);
    EXPECT_NEAR(f.design.column("ETH").values[r], std::log(p.at("eth_price")[i] / p.at("eth_price")[i - 1]), 1e-12);
    EXPECT_NEAR(f.design.column("FGI").values[r], p.at("fgi")[i] - p.at("fgi")[i - 1], 1e-12);
    EXPECT_NEAR(f.design.column("Premium").values[r], 100 * (p.at("ezeth_price")[i] / p.at("eth_price")[i] - 1), 1e-12);
    EXPECT_NEAR(f.design.column("Share").values[r], p.at("ezeth_supply")[i] / p.at("lrp_total_supply")[i], 1e-15);
    // two-pass sample std of the 7 log fee returns ending at i
    long double m = 0, ss = 0;
    std::vector<long double> ret;
    for (std::size_t j = i - 6; j <= i; ++j) ret.push_back(std::log((long double)p.at("tx_fee")[j] / p.at("tx_fee")[j - 1]));
    for (auto x : ret) m += x;
    m /= 7;
    for (auto x : ret) ss += (x - m) * (x - m);
    EXPECT_NEAR(f.design.column("TxFee").values[r], static_cast<double>(std::sqrt(ss / 6)), 1e-12);
  }
}

TEST(Features, EventDummyMarksFourDates) {
  const auto f = engineer_features(fixture_panel());
  const auto& ev = f.design.column("Events").values;
  EXPECT_EQ(std::count(ev.begin(), ev.end(), 1.0), 4);
  EXPECT_EQ(std::count(ev.begin(), ev.end(), 0.0), 448);
  const auto at = [&](Date d) { return ev[static_cast<std::size_t>(d - f.design.dates().front())]; };
  EXPECT_EQ(at(Date(2024, 4, 30)), 1.0);
  EXPECT_EQ(at(Date(2024, 4, 26)), 1.0);
  EXPECT_EQ(at(Date(2024, 10, 1)), 1.0);
  EXPECT_EQ(at(Date(2024, 4, 27)), 0.0);
}

TEST(Features, EqualPricesAndConstantFeeGiveZeros) {
  const auto f = engineer_features(constant_panel(30));
  EXPECT_EQ(f.rows(), 23u);
  for (double v : f.design.column("Premium").values) EXPECT_EQ(v, 0.0);
  for (double v : f.design.column("TxFee").values) EXPECT_EQ(v, 0.0);
  for (double v : f.design.column("FGI").values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(f.transforms.at("TVL2"), (std::vector<std::string>{"log"}));
}

TEST(Features, ErrorsNameDateAndColumn) {
  auto p = constant_panel(30);
  p.columns[raw::kTxFee][12] = 0.0;
  try {
    engineer_features(p);
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("tx_fee"), std::string::npos);
    EXPECT_NE(what.find((Date(2024, 1, 15) + 12).iso()), std::string::npos);
  }
  EXPECT_THROW(engineer_features(constant_panel(7)), InsufficientDataError);
  EXPECT_NO_THROW(engineer_features(constant_panel(8)));
  auto missing = constant_panel(30);
  missing.columns.erase(raw::kFgi);
  EXPECT_THROW(engineer_features(missing), ValidationError);
}

TEST(Features, DeterministicAndOrderInsensitive) {
  auto series = load_panel_csv(kFixtures / "synthetic_panel.csv");
  const auto base = engineer_features(align_daily(series));
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(std::span<RawSeries>(series));
    EXPECT_EQ(engineer_features(align_daily(series)), base);
  }
}

TEST(Features, FrameRoundTripsThroughJsonAndCsv) {
  const auto f = engineer_features(fixture_panel());
  EXPECT_EQ(feature_frame_from_json(nlohmann::json::parse(to_json(f).dump())), f);
  EXPECT_EQ(feature_frame_from_csv(to_csv(f)), f);
  auto filled = f;
  filled.fill_counts = {{"fgi", 2}, {"tx_fee", 1}};
  EXPECT_EQ(feature_frame_from_csv(to_csv(filled)), filled);
  EXPECT_EQ(feature_frame_from_json(to_json(filled)), filled);
}

TEST(Features, LaggedModelsDropOneAndTwoRows) {
  const auto f = engineer_features(fixture_panel());
  std::vector<double> r2;
  for (int lag : {0, 1, 2}) {
    const auto fit = econ::ols_fit(econ::lag_model(f.design, lag));
    EXPECT_EQ(fit.n, 452u - static_cast<std::size_t>(lag));
    r2.push_back(fit.r2);
  }
  EXPECT_GT(r2[1], r2[0]);
  EXPECT_GT(r2[1], r2[2]);
}

TEST(Features, L2TvlGrangerCausesRevenueAtLagOne) {
  const auto f = engineer_features(fixture_panel());
  const auto scan = econ::granger_scan(f.design.column("TVL2").values, f.design.y(), 5);
  const auto& best = econ::selected(scan);
  EXPECT_EQ(best.lag, 1);
  EXPECT_LT(best.p_value, 0.01);
}

// ---------------------------------------------------------------- fixtures and summary

TEST(Fixtures, SyntheticPanelMatchesGenerator) {
  EXPECT_EQ(read_file(kFixtures / "synthetic_panel.csv"), to_csv(synthetic_panel()));
  const auto p = fixture_panel();
  EXPECT_EQ(p.rows(), 459u);
  EXPECT_EQ(p.dates.front(), kSyntheticStart);
  EXPECT_EQ(p.dates.back(), kSyntheticEnd);
  EXPECT_EQ(p.columns, synthetic_panel().columns);
}

TEST(Summary, HandArithmetic) {
  const auto r = describe("x", {1, 2, 3});
  EXPECT_DOUBLE_EQ(r.mean, 2.0);
  EXPECT_DOUBLE_EQ(r.std, 1.0);
  EXPECT_EQ(r.min, 1.0);
  EXPECT_EQ(r.max, 3.0);
  const auto c = describe("c", std::vector<double>(17, 0.1));
  EXPECT_EQ(c.mean, 0.1);
  EXPECT_EQ(c.std, 0.0);
  EXPECT_EQ(c.min, 0.1);
  EXPECT_EQ(c.max, 0.1);
  EXPECT_THROW(describe("e", {}), ValidationError);
  EXPECT_THROW(summary_stats(constant_panel(7)), ValidationError);
}

TEST(Summary, FixtureTablesMatchGoldenFiles) {
  const auto p = fixture_panel();
  const auto raw_view = render_table(summary_stats(p));
  const auto eng_view = render_table(summary_stats(engineer_features(p)));
  EXPECT_EQ(raw_view, render_table(summary_stats(fixture_panel())));
  EXPECT_EQ(raw_view, read_file(fs::path(RESTAKE_SOURCE_DIR) / "tests/golden/summary_raw.txt"));
  EXPECT_EQ(eng_view, read_file(fs::path(RESTAKE_SOURCE_DIR) / "tests/golden/summary_engineered.txt"));
  const auto t = summary_stats(p);
  EXPECT_EQ(t.rows.size(), 11u);
  EXPECT_EQ(t.rows.front().n, 452u);
  EXPECT_EQ(t.first_date, "2024-01-22");
  EXPECT_NE(raw_view.find("Std. Dev."), std::string::npos);
}
