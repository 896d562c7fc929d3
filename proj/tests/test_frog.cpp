#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "frogsim/exact.hpp"
#include "frogsim/experiments.hpp"
#include "frogsim/frog.hpp"
#include "frogsim/stats.hpp"

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

Histogram frog_histogram(const Graph& g, double p, std::uint64_t reps, std::uint64_t seed,
                         Schedule schedule) {
  Histogram h(g.size());
  for (std::uint64_t i = 0; i < reps; ++i) {
    RngStream r = substream(seed, i);
    h.add(run_frog(g, p, r, FrogOptions{schedule, 1'000'000}).v_infinity);
  }
  return h;
}

}  // namespace

TEST(Graph, CompleteGraphShape) {
  const Graph g = make_complete(6);
  EXPECT_EQ(g.size(), 6);
  EXPECT_EQ(g.edge_count(), 15);
  for (Graph::Vertex v = 0; v < 6; ++v) {
    EXPECT_EQ(g.degree(v), 5);
    for (const auto u : g.neighbors(v)) EXPECT_NE(u, v);
  }
}

TEST(Graph, PathAndCycle) {
  EXPECT_EQ(make_path(5).edge_count(), 4);
  EXPECT_EQ(make_cycle(5).edge_count(), 5);
  EXPECT_EQ(make_path(5).degree(0), 1);
  EXPECT_EQ(make_cycle(5).degree(0), 2);
  EXPECT_EQ(code_of([] { make_cycle(2); }), ErrorCode::NInvalid);
  EXPECT_EQ(code_of([] { make_complete(1); }), ErrorCode::NInvalid);
}

TEST(Graph, RejectsMalformedInput) {
  const std::vector<Graph::Edge> loop{{0, 0}, {0, 1}};
  const std::vector<Graph::Edge> dup{{0, 1}, {1, 0}};
  const std::vector<Graph::Edge> split{{0, 1}, {2, 3}};
  const std::vector<Graph::Edge> range{{0, 5}};
  EXPECT_EQ(code_of([&] { Graph::from_edges(2, loop); }), ErrorCode::GraphInvalid);
  EXPECT_EQ(code_of([&] { Graph::from_edges(2, dup); }), ErrorCode::GraphInvalid);
  EXPECT_EQ(code_of([&] { Graph::from_edges(4, split); }), ErrorCode::GraphInvalid);
  EXPECT_EQ(code_of([&] { Graph::from_edges(2, range); }), ErrorCode::GraphInvalid);
  EXPECT_EQ(code_of([&] { Graph::from_edges(2, std::vector<Graph::Edge>{{0, 1}}, 7); }),
            ErrorCode::GraphInvalid);
}

TEST(Graph, EdgeListRoundTrip) {
  const Graph g = make_cycle(7);
  std::stringstream ss;
  write_edge_list(ss, g);
  const Graph h = read_edge_list(ss);
  EXPECT_EQ(h.size(), 7);
  EXPECT_EQ(h.edge_count(), 7);
  EXPECT_EQ(h.root(), g.root());
  for (Graph::Vertex v = 0; v < 7; ++v) EXPECT_EQ(h.degree(v), 2);
}

TEST(Graph, EdgeListParseErrors) {
  for (const char* text : {"", "3 2", "3 2 0\n0 1\n", "3 1 0\n0 1\n5", "x y z"}) {
    std::stringstream ss(text);
    EXPECT_EQ(code_of([&] { read_edge_list(ss); }), ErrorCode::ParseError) << text;
  }
}

TEST(Frog, ZeroSurvival) {
  RngStream r(1);
  const Trajectory t = run_frog(make_complete(5), 0.0, r);
  EXPECT_EQ(t.v_infinity, 1);
  EXPECT_EQ(t.deaths, 1);
}

TEST(Frog, ConservationOnAnyGraph) {
  for (const Graph& g : {make_complete(9), make_path(9), make_cycle(9)}) {
    for (std::uint64_t i = 0; i < 300; ++i) {
      RngStream r = substream(2, i);
      const Trajectory t = run_frog(g, 0.8, r);
      EXPECT_EQ(t.deaths, 1 + t.new_vertices);
      EXPECT_EQ(t.v_infinity, 1 + t.new_vertices);
      EXPECT_LE(t.v_infinity, g.size());
    }
  }
}

TEST(Frog, PathFromEndpointReachesNeighbourWithProbabilityP) {
  // The root is an endpoint with a single neighbour, so P(V_inf >= 2) = p.
  const Graph g = make_path(60);
  const std::uint64_t reps = 40000;
  std::uint64_t reach = 0;
  for (std::uint64_t i = 0; i < reps; ++i) {
    RngStream r = substream(6, i);
    reach += run_frog(g, 0.55, r).v_infinity >= 2;
  }
  const double sigma = std::sqrt(0.55 * 0.45 / reps);
  EXPECT_NEAR(reach / double(reps), 0.55, 4 * sigma);
}

TEST(Frog, MatchesExactOnCompleteGraph) {
  const double p = 0.7;
  const int N = 6;
  const PmfTable exact = exact_pmf(validate_params(p, N));
  const std::uint64_t reps = 100000;
  const Histogram h = frog_histogram(make_complete(N), p, reps, 31, Schedule::Queue);
  for (int v = 1; v <= N; ++v) {
    const double q = exact.at(v);
    EXPECT_NEAR(h.counts[v] / double(reps), q, 4.5 * binomial_sigma(q, reps)) << "v = " << v;
  }
}

TEST(Frog, SchedulingDoesNotChangeLawOnCycle) {
  const Graph g = make_cycle(40);
  const std::uint64_t reps = 30000;
  const Histogram a = frog_histogram(g, 0.85, reps, 101, Schedule::Queue);
  const Histogram b = frog_histogram(g, 0.85, reps, 202, Schedule::Simultaneous);
  const double d = ks_statistic(a.counts, b.counts);
  EXPECT_LT(d, ks_critical_value(reps, reps, 0.001));
}

TEST(Frog, SchedulingDoesNotChangeLawOnCompleteGraph) {
  const Graph g = make_complete(15);
  const std::uint64_t reps = 30000;
  const Histogram a = frog_histogram(g, 0.6, reps, 5, Schedule::Queue);
  const Histogram b = frog_histogram(g, 0.6, reps, 6, Schedule::Simultaneous);
  EXPECT_LT(ks_statistic(a.counts, b.counts), ks_critical_value(reps, reps, 0.001));
}

TEST(Frog, StepCap) {
  RngStream r(4);
  EXPECT_EQ(code_of([&] {
              for (int i = 0; i < 100; ++i) run_frog(make_complete(50), 0.95, r, FrogOptions{Schedule::Queue, 3});
            }),
            ErrorCode::RoundCapExceeded);
}
