#include <gtest/gtest.h>

#include <sstream>

#include "frogsim/exact.hpp"
#include "frogsim/experiments.hpp"
#include "frogsim/report_io.hpp"

using namespace frogsim;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::DomainError;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.p_grid = {0.75};
  c.N_grid = {1001};
  c.replicas = 2000;
  c.master_seed = 5;
  return c;
}

}  // namespace

TEST(Wilson, Examples) {
  EXPECT_EQ(wilson_interval(0, 100).lo, 0.0);
  EXPECT_EQ(wilson_interval(100, 100).hi, 1.0);
  const Interval mid = wilson_interval(50, 100);
  EXPECT_NEAR(0.5 - mid.lo, mid.hi - 0.5, 1e-12);
  EXPECT_TRUE(wilson_interval(333, 1000).contains(1.0 / 3.0));
}

TEST(Wilson, DirectFormula) {
  // z = 1.959963984540054 for 95%
  const double z = 1.959963984540054, n = 1000, ph = 0.333;
  const double center = (ph + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
  const Interval ci = wilson_interval(333, 1000);
  EXPECT_NEAR(ci.lo, center - half, 1e-12);
  EXPECT_NEAR(ci.hi, center + half, 1e-12);
}

TEST(Wilson, BoundsAndErrors) {
  for (std::uint64_t s = 0; s <= 40; ++s) {
    const Interval ci = wilson_interval(s, 40, 0.99);
    EXPECT_GE(ci.lo, 0.0);
    EXPECT_LE(ci.hi, 1.0);
    EXPECT_TRUE(ci.contains(s / 40.0));
  }
  EXPECT_EQ(code_of([] { wilson_interval(5, 4); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { wilson_interval(0, 0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { wilson_interval(1, 4, 1.0); }), ErrorCode::DomainError);
}

TEST(KS, IdenticalAndDisjoint) {
  const std::vector<std::uint64_t> a{0, 5, 5}, b{0, 10, 10}, c{10, 0, 0};
  EXPECT_DOUBLE_EQ(ks_statistic(a, b), 0.0);
  EXPECT_DOUBLE_EQ(ks_statistic(a, c), 1.0);
}

TEST(Threshold, ParseAndEvaluate) {
  EXPECT_DOUBLE_EQ(ThresholdSpec::parse("sqrt").evaluate(10000), 100.0);
  EXPECT_DOUBLE_EQ(ThresholdSpec::parse("sqrt:2").evaluate(10000), 200.0);
  EXPECT_NEAR(ThresholdSpec::parse("log:3").evaluate(1000), 3 * std::log(1000.0), 1e-12);
  EXPECT_NEAR(ThresholdSpec::parse("log2").evaluate(1000), std::pow(std::log(1000.0), 2), 1e-12);
  for (const char* bad : {"cube", "sqrt:", "sqrt:x", "log:-1", "log:0"}) {
    EXPECT_EQ(code_of([&] { ThresholdSpec::parse(bad); }), ErrorCode::ConfigInvalid) << bad;
  }
}

TEST(ParallelTally, BitIdenticalForAnyWorkerCount) {
  const SimParams s = validate_params(0.75, 2001);
  const Histogram one = aux_histogram(s, 3000, 99, 1);
  for (const unsigned w : {2U, 3U, 8U}) EXPECT_EQ(aux_histogram(s, 3000, 99, w), one);
  EXPECT_EQ(one.total(), 3000u);
}

TEST(ParallelTally, ReportsLowestFailingReplica) {
  try {
    parallel_tally<Histogram>(
        100, 4,
        [](std::uint64_t i, Histogram&) {
          with_replica_index(i, [&] {
            if (i == 30 || i == 80) throw Error(ErrorCode::RoundCapExceeded, "cap");
            return 0;
          });
        },
        Histogram(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RoundCapExceeded);
    ASSERT_TRUE(e.replica().has_value());
    EXPECT_EQ(*e.replica(), 30u);
  }
}

TEST(Cell, ZeroSurvivalIsAlwaysSmall) {
  ExperimentConfig c = small_config();
  c.p_grid = {0.0};
  const CellStats cell = run_cell(validate_params(0.0, 1001), c, 0);
  EXPECT_EQ(cell.small, c.replicas);
  EXPECT_DOUBLE_EQ(cell.p_small(), 1.0);
  EXPECT_DOUBLE_EQ(cell.limit_small, 1.0);
}

TEST(Cell, PartitionAndDeterminism) {
  const ExperimentConfig c = small_config();
  const CellStats a = run_cell(validate_params(0.75, 1001), c, 3);
  const CellStats b = run_cell(validate_params(0.75, 1001), c, 3);
  const CellStats other = run_cell(validate_params(0.75, 1001), c, 4);
  EXPECT_EQ(a.small + a.middle + a.large, c.replicas);
  EXPECT_EQ(a.small, b.small);
  EXPECT_EQ(a.large, b.large);
  EXPECT_EQ(a.ci_small.lo, b.ci_small.lo);
  EXPECT_TRUE(other.small != a.small || other.large != a.large);
  EXPECT_NEAR(a.threshold_large, 0.11 * 1000, 1e-9);
  EXPECT_NEAR(a.threshold_small, std::sqrt(1000.0), 1e-12);
}

TEST(Cell, MatchesExactForThreeVertices) {
  ExperimentConfig c = small_config();
  c.replicas = 1'000'000;
  c.small = ThresholdSpec{ThresholdKind::Sqrt, 1.0 / std::sqrt(2.0)};  // f(2) = 1
  c.cprime = 1.0 - 1e-9;                                               // large: v >= 2 - eps
  const CellStats cell = run_cell(validate_params(0.5, 3), c, 0);
  const double sigma = binomial_sigma(0.5, c.replicas);
  EXPECT_NEAR(cell.p_small(), 0.5, 4 * sigma);
  // the middle band is empty here; large = P(V >= 2) = 2/9 + 5/18
  EXPECT_EQ(cell.middle, 0u);
  EXPECT_NEAR(cell.p_large(), 0.5, 4 * sigma);
}

TEST(Cell, SmallBandTakesPrecedence) {
  // f(2) = 2 covers v = 1 and v = 2 even though v = 2 also clears c' n.
  ExperimentConfig c = small_config();
  c.replicas = 1'000'000;
  c.small = ThresholdSpec{ThresholdKind::Sqrt, std::sqrt(2.0)};
  c.cprime = 0.5;
  const CellStats cell = run_cell(validate_params(0.5, 3), c, 7);
  const double small = 0.5 + 2.0 / 9.0;
  EXPECT_EQ(cell.middle, 0u);
  EXPECT_NEAR(cell.p_small(), small, 4 * binomial_sigma(small, c.replicas));
  EXPECT_NEAR(cell.p_large(), 5.0 / 18.0, 4 * binomial_sigma(5.0 / 18.0, c.replicas));
}

TEST(Config, Validation) {
  ExperimentConfig c = small_config();
  c.p_grid.clear();
  EXPECT_EQ(code_of([&] { run_sweep(c); }), ErrorCode::ConfigInvalid);
  c = small_config();
  c.replicas = 0;
  EXPECT_EQ(code_of([&] { run_sweep(c); }), ErrorCode::ConfigInvalid);
  c = small_config();
  c.small = ThresholdSpec{ThresholdKind::Log, 0.01};
  EXPECT_EQ(code_of([&] { run_sweep(c); }), ErrorCode::ConfigInvalid);
  c = small_config();
  c.cprime = 1.5;
  EXPECT_EQ(code_of([&] { run_sweep(c); }), ErrorCode::ConfigInvalid);
  c = small_config();
  c.p_grid = {1.0};
  EXPECT_EQ(code_of([&] { run_sweep(c); }), ErrorCode::PInvalid);
}

TEST(Sweep, SortedDedupedAndDeterministic) {
  ExperimentConfig c = small_config();
  c.p_grid = {0.75, 0.4, 0.75};
  c.N_grid = {2001, 1001};
  c.replicas = 500;
  const ExperimentReport r = run_sweep(c);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[0].params.p, 0.4);
  EXPECT_EQ(r.rows[0].params.N, 1001);
  EXPECT_EQ(r.rows[1].params.N, 2001);
  EXPECT_EQ(r.rows[3].params.p, 0.75);
  const ExperimentReport again = run_sweep(c);
  std::ostringstream a, b;
  write_csv(a, r);
  write_csv(b, again);
  // wall time is the only column allowed to differ
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(r.rows[i].small, again.rows[i].small);
    EXPECT_EQ(r.rows[i].large, again.rows[i].large);
    EXPECT_EQ(r.rows[i].ci_large.hi, again.rows[i].ci_large.hi);
  }
}

TEST(Sweep, FailedCellIsFlaggedAndSweepContinues) {
  ExperimentConfig c = small_config();
  c.N_grid = {11, 5001};
  c.replicas = 200;
  c.round_cap = 200;  // too small for the large cell
  const ExperimentReport r = run_sweep(c);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_FALSE(r.rows[0].error.has_value());
  ASSERT_TRUE(r.rows[1].error.has_value());
  EXPECT_NE(r.rows[1].error->find("replica"), std::string::npos);
  std::ostringstream out;
  write_csv(out, r);
  EXPECT_NE(out.str().find("nan"), std::string::npos);
  EXPECT_TRUE(to_json(r)["rows"][1]["p_small"].is_null());
}

TEST(Sweep, SmallModeApproachesLimit) {
  ExperimentConfig c = small_config();
  c.N_grid = {1001, 10001};
  c.replicas = 4000;
  const ExperimentReport r = run_sweep(c);
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.p_small(), 1.0 / 3.0, 0.03);
    EXPECT_NEAR(row.p_large(), 2.0 / 3.0, 0.03);
    EXPECT_LE(row.p_middle(), 0.01);
  }
}

TEST(Report, CsvHeaderAndJsonMirror) {
  ExperimentConfig c = small_config();
  c.replicas = 100;
  const ExperimentReport r = run_sweep(c);
  std::ostringstream out;
  write_csv(out, r);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "p,N,replicas,threshold_small,threshold_large,p_small,lo_small,hi_small,p_large,"
            "lo_large,hi_large,p_middle,limit_small,limit_large,wall_ms");
  const Json j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j["rows"][0].items()) keys.push_back(k);
  std::string joined;
  for (const auto& k : keys) joined += (joined.empty() ? "" : ",") + k;
  EXPECT_EQ(joined, header);
  EXPECT_EQ(j["config"]["version"], std::string(kVersion));
  EXPECT_EQ(j["config"]["seed"], 5);
}
