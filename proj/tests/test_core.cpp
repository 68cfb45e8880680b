#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <vector>

#include "restake/core/date.hpp"
#include "restake/core/hash.hpp"
#include "restake/core/io.hpp"
#include "restake/core/rng.hpp"

using namespace restake;

TEST(Date, ParsesAndPrintsIso) {
  const Date d = Date::parse("2024-04-30");
  EXPECT_EQ(d.iso(), "2024-04-30");
  EXPECT_EQ((d + 1).iso(), "2024-05-01");
  EXPECT_EQ(Date(2025, 4, 17) - Date(2024, 1, 22), 451);
  EXPECT_EQ(days_inclusive(Date(2024, 1, 22), Date(2025, 4, 17)), 452);
}

TEST(Date, RejectsMalformed) {
  EXPECT_THROW(Date::parse("2024-4-30"), DataError);
  EXPECT_THROW(Date::parse("2024-02-30"), DataError);
  EXPECT_THROW(Date::parse("2024-04-30x"), DataError);
}

TEST(Date, FromUnixSeconds) {
  EXPECT_EQ(Date::from_unix_seconds(0).iso(), "1970-01-01");
  EXPECT_EQ(Date::from_unix_seconds(1714435200).iso(), "2024-04-30");
  EXPECT_EQ(Date::from_unix_seconds(1714435200 + 86399).iso(), "2024-04-30");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SplitIsPureAndDistinct) {
  Rng base(7);
  Rng s1 = base.split(1), s1b = base.split(1), s2 = base.split(2);
  EXPECT_EQ(s1.next_u64(), s1b.next_u64());
  EXPECT_NE(Rng(7).split(1).next_u64(), s2.next_u64());
  EXPECT_EQ(derive_seed(7, 1), s1.seed());
}

TEST(Rng, FrozenFirstDraws) {
  // pinned so that a change of engine or conversion shows up as a failure
  Rng r(2024);
  const double u = r.uniform();
  Rng r2(2024);
  EXPECT_EQ(u, static_cast<double>(r2.next_u64() >> 11) * 0x1.0p-53);
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(1);
  double su = 0, sn = 0, sn2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Rng, IndexInRangeAndShuffleIsPermutation) {
  Rng r(3);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.index(7), 7u);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  r.shuffle(std::span<int>(v));
  EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 10u);
}

TEST(Hash, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_fixed(-0.0001, 2), "0.00");
  EXPECT_EQ(format_fixed(1.005, 1), "1.0");
}

TEST(Io, ParseDoubleIsStrict) {
  EXPECT_DOUBLE_EQ(parse_double(" 3.5\r"), 3.5);
  EXPECT_THROW(parse_double("3,5"), DataError);
  EXPECT_THROW(parse_double(""), DataError);
  EXPECT_THROW(parse_double("1.2.3"), DataError);
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "restake_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "x.txt";
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  EXPECT_EQ(read_file(path), "two");
  std::filesystem::remove_all(dir);
}
