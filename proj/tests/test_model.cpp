#include <gtest/gtest.h>

#include <cmath>
#include <concepts>
#include <random>
#include <set>

#include "frogsim/model.hpp"

using namespace frogsim;

TEST(Params, AcceptsValidRange) {
  const SimParams s = validate_params(0.0, 2, 7);
  EXPECT_EQ(s.n(), 1);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_NO_THROW(validate_params(0.999, 100000));
}

TEST(Params, RejectsBadP) {
  for (const double p : {1.0, -0.1, 1.5, std::nan("")}) {
    try {
      validate_params(p, 5);
      FAIL() << "accepted p = " << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::PInvalid);
    }
  }
}

TEST(Params, RejectsSmallN) {
  for (const std::int64_t N : {1, 0, -3}) {
    try {
      validate_params(0.5, N);
      FAIL() << "accepted N = " << N;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NInvalid);
    }
  }
}

TEST(Outcome, CodesAndNames) {
  EXPECT_EQ(code(RoundOutcome::Death), 0);
  EXPECT_EQ(code(RoundOutcome::Revisit), 1);
  EXPECT_EQ(code(RoundOutcome::NewVertex), 2);
  EXPECT_EQ(to_string(RoundOutcome::Revisit), "Revisit");
  EXPECT_EQ(to_string(ErrorCode::BandOverflow), "BandOverflow");
}

TEST(Rng, Deterministic) {
  RngStream a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    (void)c.next();
  }
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == c);
}

TEST(Rng, UniformRangeAndMean) {
  RngStream r(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, BelowIsInRangeAndCoversAll) {
  RngStream r(9);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto x = r.below(7);
    ASSERT_LT(x, 7u);
    ++seen[x];
  }
  for (const int s : seen) EXPECT_NEAR(s, 10000, 500);
}

TEST(Rng, SubstreamsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) firsts.insert(substream(5, i).next());
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(substream(5, 3), substream(5, 3));
}

TEST(Rng, SatisfiesUniformRandomBitGenerator) {
  static_assert(std::uniform_random_bit_generator<RngStream>);
  RngStream r(3);
  std::uniform_int_distribution<int> d(1, 6);
  for (int i = 0; i < 100; ++i) {
    const int x = d(r);
    EXPECT_TRUE(x >= 1 && x <= 6);
  }
}
