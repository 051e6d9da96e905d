#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "bumpwatch/dtw.hpp"
#include "oracles.hpp"

using namespace bumpwatch;

namespace {

std::vector<double> random_seq(std::mt19937_64& rng, std::size_t len) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> v(len);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Dtw, IdentityIsZero) {
  const std::vector<double> s{0.3, -1.2, 4.0, 2.5, 2.5};
  EXPECT_EQ(dtw_distance(s, s), 0.0);
  EXPECT_EQ(dtw_distance(std::vector<double>{0, 0, 0}, std::vector<double>{0}), 0.0);
}

TEST(Dtw, SmallCaseMatchesPathEnumeration) {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  const double expected = oracle::dtw_paths(a, b);
  // Frozen from the oracle: the path (0,0),(1,0),(2,1),(2,2) costs 1 + 0 + 0 + 1.
  EXPECT_EQ(expected, 2.0);
  EXPECT_EQ(dtw_distance(a, b), expected);
}

TEST(Dtw, OracleEquivalenceOnRandomPairs) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 8);
  for (int k = 0; k < 1000; ++k) {
    const auto a = random_seq(rng, len(rng));
    const auto b = random_seq(rng, len(rng));
    ASSERT_EQ(dtw_distance(a, b), oracle::dtw_paths(a, b)) << "pair " << k;
  }
}

TEST(Dtw, SymmetricNonNegativeShiftSensitive) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto a = random_seq(rng, 5 + k % 40);
    const auto b = random_seq(rng, 5 + (k * 7) % 40);
    const double ab = dtw_distance(a, b);
    EXPECT_EQ(ab, dtw_distance(b, a));
    EXPECT_GE(ab, 0.0);
    std::vector<double> shifted = a;
    for (auto& x : shifted) x += 0.25;
    EXPECT_GT(dtw_distance(a, shifted), 0.0);
  }
}

TEST(Dtw, BandNeverCheaperAndConvergesWhenWide) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 200; ++k) {
    const auto a = random_seq(rng, 10 + k % 20);
    const auto b = random_seq(rng, 10 + (k * 3) % 20);
    const double free = dtw_distance(a, b);
    const std::size_t skew = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    for (std::size_t w = std::max<std::size_t>(1, skew); w <= std::max(a.size(), b.size()); ++w)
      EXPECT_GE(dtw_distance(a, b, {w}), free);
    EXPECT_EQ(dtw_distance(a, b, {std::max(a.size(), b.size())}), free);
  }
}

TEST(Dtw, MatrixAgreesWithRollingRows) {
  std::mt19937_64 rng(12);
  const auto a = random_seq(rng, 17), b = random_seq(rng, 23);
  const auto m = dtw_cost_matrix(a, b);
  EXPECT_EQ(m.back(), dtw_distance(a, b));
  EXPECT_EQ(dtw_cost_matrix(a, b, {7}).back(), dtw_distance(a, b, {7}));
}

TEST(Dtw, Errors) {
  const std::vector<double> empty, one{1.0}, five{1, 2, 3, 4, 5};
  EXPECT_THROW(dtw_distance(empty, one), InputError);
  EXPECT_THROW(dtw_distance(one, std::vector<double>{std::nan("")}), InputError);
  EXPECT_THROW(dtw_distance(one, five, {2}), ConfigError);
  EXPECT_THROW(dtw_distance(five, five, {0}), ConfigError);
}
