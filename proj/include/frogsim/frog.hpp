#pragma once

// Direct particle-level simulation of the frog model on a finite connected
// graph: geometric lifetimes, nearest-neighbour jumps, wake-on-first-visit.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "frogsim/aux_process.hpp"
#include "frogsim/model.hpp"

namespace frogsim {

/// Undirected simple connected graph in CSR form.
class Graph {
 public:
  using Vertex = std::int64_t;
  using Edge = std::pair<Vertex, Vertex>;

  /// Validates and builds. Rejects self-loops, duplicate edges, out-of-range
  /// endpoints and disconnected graphs.
  static Graph from_edges(Vertex vertex_count, std::span<const Edge> edges, Vertex root = 0) {
    if (vertex_count < 2) {
      throw Error(ErrorCode::NInvalid, "graph needs at least 2 vertices");
    }
    if (root < 0 || root >= vertex_count) {
      throw Error(ErrorCode::GraphInvalid, "root " + std::to_string(root) + " out of range");
    }
    std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(vertex_count));
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) {
        throw Error(ErrorCode::GraphInvalid, "edge endpoint out of range: " +
                                                 std::to_string(u) + " " + std::to_string(v));
      }
      if (u == v) {
        throw Error(ErrorCode::GraphInvalid, "self-loop at vertex " + std::to_string(u));
      }
      adj[static_cast<std::size_t>(u)].push_back(v);
      adj[static_cast<std::size_t>(v)].push_back(u);
    }
    Graph g;
    g.root_ = root;
    g.offsets_.reserve(adj.size() + 1);
    g.offsets_.push_back(0);
    for (auto& list : adj) {
      std::sort(list.begin(), list.end());
      if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
        throw Error(ErrorCode::GraphInvalid, "duplicate edge");
      }
      g.targets_.insert(g.targets_.end(), list.begin(), list.end());
      g.offsets_.push_back(static_cast<std::int64_t>(g.targets_.size()));
    }
    if (!g.connected()) throw Error(ErrorCode::GraphInvalid, "graph is not connected");
    return g;
  }

  Vertex size() const noexcept { return static_cast<Vertex>(offsets_.size()) - 1; }
  Vertex root() const noexcept { return root_; }
  std::int64_t edge_count() const noexcept {
    return static_cast<std::int64_t>(targets_.size()) / 2;
  }
  std::int64_t degree(Vertex v) const noexcept {
    return offsets_[static_cast<std::size_t>(v) + 1] - offsets_[static_cast<std::size_t>(v)];
  }
  std::span<const Vertex> neighbors(Vertex v) const noexcept {
    const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(v)]);
    return {targets_.data() + b, static_cast<std::size_t>(degree(v))};
  }

 private:
  bool connected() const {
    std::vector<char> seen(static_cast<std::size_t>(size()), 0);
    std::vector<Vertex> stack{root_};
    seen[static_cast<std::size_t>(root_)] = 1;
    Vertex reached = 1;
    while (!stack.empty()) {
      const Vertex u = stack.back();
      stack.pop_back();
      for (const Vertex w : neighbors(u)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    return reached == size();
  }

  Vertex root_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<Vertex> targets_;
};

inline Graph make_complete(std::int64_t N) {
  if (N < 2) throw Error(ErrorCode::NInvalid, "complete graph needs N >= 2");
  std::vector<Graph::Edge> edges;
  edges.reserve(static_cast<std::size_t>(N * (N - 1) / 2));
  for (std::int64_t u = 0; u < N; ++u) {
    for (std::int64_t v = u + 1; v < N; ++v) edges.emplace_back(u, v);
  }
  return Graph::from_edges(N, edges, 0);
}

inline Graph make_path(std::int64_t N) {
  if (N < 2) throw Error(ErrorCode::NInvalid, "path needs N >= 2");
  std::vector<Graph::Edge> edges;
  for (std::int64_t u = 0; u + 1 < N; ++u) edges.emplace_back(u, u + 1);
  return Graph::from_edges(N, edges, 0);
}

inline Graph make_cycle(std::int64_t N) {
  if (N < 3) throw Error(ErrorCode::NInvalid, "cycle needs N >= 3");
  std::vector<Graph::Edge> edges;
  for (std::int64_t u = 0; u < N; ++u) edges.emplace_back(u, (u + 1) % N);
  return Graph::from_edges(N, edges, 0);
}

/// Edge-list text format: header "N M root", then M lines "u v", 0-indexed,
/// whitespace separated.
inline Graph read_edge_list(std::istream& in) {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::int64_t root = 0;
  if (!(in >> n >> m >> root)) {
    throw Error(ErrorCode::ParseError, "expected header 'N M root'");
  }
  if (m < 0) throw Error(ErrorCode::ParseError, "negative edge count");
  std::vector<Graph::Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    std::int64_t u = 0;
    std::int64_t v = 0;
    if (!(in >> u >> v)) {
      throw Error(ErrorCode::ParseError, "expected " + std::to_string(m) + " edges, read " +
                                             std::to_string(i));
    }
    edges.emplace_back(u, v);
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::ParseError, "trailing data after edge list");
  return Graph::from_edges(n, edges, root);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.size() << ' ' << g.edge_count() << ' ' << g.root() << '\n';
  for (Graph::Vertex u = 0; u < g.size(); ++u) {
    for (const auto v : g.neighbors(u)) {
      if (u < v) out << u << ' ' << v << '\n';
    }
  }
}

enum class Schedule {
  Queue,         // one particle acts per step, round robin
  Simultaneous,  // every active particle acts once per time step
};

struct FrogOptions {
  Schedule schedule = Schedule::Queue;
  std::uint64_t step_cap = 1'000'000'000ULL;
};

/// Runs the frog model until no active particle remains. Each action is a
/// survival draw followed, on survival, by a uniform jump to a neighbour; a
/// particle woken during a step starts acting from the next step. In the
/// returned Trajectory, `r_rounds` counts particle actions (Queue) or time
/// steps (Simultaneous); `new_vertices` counts wake-ups.
inline Trajectory run_frog(const Graph& graph, double p, RngStream& stream,
                           const FrogOptions& options = {}) {
  Trajectory t;
  t.params = validate_params(p, graph.size());
  const double death = 1.0 - p;
  std::vector<char> visited(static_cast<std::size_t>(graph.size()), 0);
  visited[static_cast<std::size_t>(graph.root())] = 1;
  std::int64_t visited_count = 1;

  // Returns the new position, or -1 if the particle died.
  const auto act = [&](Graph::Vertex at, std::vector<Graph::Vertex>& woken) -> Graph::Vertex {
    if (stream.uniform() < death) {
      ++t.deaths;
      return -1;
    }
    const auto nb = graph.neighbors(at);
    const Graph::Vertex to = nb[static_cast<std::size_t>(stream.below(nb.size()))];
    auto& seen = visited[static_cast<std::size_t>(to)];
    if (!seen) {
      seen = 1;
      ++visited_count;
      ++t.new_vertices;
      woken.push_back(to);
    } else {
      ++t.revisits;
    }
    return to;
  };

  const auto cap_hit = [&] {
    throw Error(ErrorCode::RoundCapExceeded,
                "frog model exceeded " + std::to_string(options.step_cap) + " steps");
  };

  std::vector<Graph::Vertex> woken;
  std::uint64_t steps = 0;
  if (options.schedule == Schedule::Queue) {
    std::deque<Graph::Vertex> active{graph.root()};
    while (!active.empty()) {
      if (steps >= options.step_cap) cap_hit();
      ++steps;
      const Graph::Vertex at = active.front();
      active.pop_front();
      woken.clear();
      const Graph::Vertex to = act(at, woken);
      if (to >= 0) active.push_back(to);
      active.insert(active.end(), woken.begin(), woken.end());
      t.peak_active = std::max<std::int64_t>(t.peak_active,
                                             static_cast<std::int64_t>(active.size()));
    }
  } else {
    std::vector<Graph::Vertex> active{graph.root()};
    std::vector<Graph::Vertex> next;
    while (!active.empty()) {
      if (steps >= options.step_cap) cap_hit();
      ++steps;
      next.clear();
      woken.clear();
      for (const Graph::Vertex at : active) {
        const Graph::Vertex to = act(at, woken);
        if (to >= 0) next.push_back(to);
      }
      next.insert(next.end(), woken.begin(), woken.end());
      std::swap(active, next);
      t.peak_active = std::max<std::int64_t>(t.peak_active,
                                             static_cast<std::int64_t>(active.size()));
    }
  }
  t.v_infinity = visited_count;
  t.r_rounds = steps;
  return t;
}

}  // namespace frogsim
