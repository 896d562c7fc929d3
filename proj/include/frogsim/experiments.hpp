#pragma once

// Monte Carlo harness: replicas on disjoint substreams, tallies merged by
// addition so results do not depend on the number of workers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "frogsim/aux_process.hpp"
#include "frogsim/model.hpp"
#include "frogsim/stats.hpp"
#include "frogsim/theory.hpp"

namespace frogsim {

/// Runs per_replica(i, tally) for i in [0, replicas) on `workers` threads,
/// each owning a contiguous block and a private Tally, then sums the blocks
/// in block order. Tally needs a default constructor (or `init`) and +=.
/// If any replica throws, the exception from the lowest block is rethrown
/// after all threads have joined.
template <class Tally, class PerReplica>
Tally parallel_tally(std::uint64_t replicas, unsigned workers, PerReplica&& per_replica,
                     const Tally& init = Tally{}) {
  workers = std::max(1U, workers);
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(replicas, 1)));
  std::vector<Tally> partial(workers, init);
  std::vector<std::exception_ptr> errors(workers);
  const auto run_block = [&](unsigned w) {
    const std::uint64_t lo = replicas * w / workers;
    const std::uint64_t hi = replicas * (w + 1) / workers;
    try {
      for (std::uint64_t i = lo; i < hi; ++i) per_replica(i, partial[w]);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run_block, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Tally total = init;
  for (const auto& part : partial) total += part;
  return total;
}

/// Counts of V_inf values; counts[v] for v = 0..N (index 0 unused).
struct Histogram {
  std::vector<std::uint64_t> counts;

  Histogram() = default;
  explicit Histogram(std::int64_t N) : counts(static_cast<std::size_t>(N + 1), 0) {}

  void add(std::int64_t v) { ++counts.at(static_cast<std::size_t>(v)); }
  std::uint64_t total() const noexcept {
    std::uint64_t s = 0;
    for (const auto c : counts) s += c;
    return s;
  }
  Histogram& operator+=(const Histogram& o) {
    if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
    for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
    return *this;
  }
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Rethrows a replica failure tagged with the replica index.
template <class Fn>
auto with_replica_index(std::uint64_t replica, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.replica()) throw;
    throw Error(e.code(), std::string(e.what()) + " (replica " + std::to_string(replica) + ")",
                replica);
  }
}

/// Histogram of V_inf from `replicas` auxiliary-process runs.
inline Histogram aux_histogram(const SimParams& params, std::uint64_t replicas,
                               std::uint64_t seed, unsigned workers = 1,
                               const AuxOptions& options = {}) {
  return parallel_tally<Histogram>(
      replicas, workers,
      [&](std::uint64_t i, Histogram& h) {
        RngStream stream = substream(seed, i);
        h.add(with_replica_index(i, [&] { return run_auxiliary(params, stream, options); })
                  .v_infinity);
      },
      Histogram(params.N));
}

// ---------------------------------------------------------------------------

enum class ThresholdKind { Sqrt, Log, Log2 };

/// The "small" threshold f(n): constant * sqrt(n), constant * log n or
/// constant * log(n)^2.
struct ThresholdSpec {
  ThresholdKind kind = ThresholdKind::Sqrt;
  double constant = 1.0;

  double evaluate(std::int64_t n) const {
    const double x = static_cast<double>(n);
    switch (kind) {
      case ThresholdKind::Sqrt: return constant * std::sqrt(x);
      case ThresholdKind::Log: return constant * std::log(x);
      case ThresholdKind::Log2: return constant * std::log(x) * std::log(x);
    }
    return 0.0;
  }

  std::string to_string() const {
    std::string name = kind == ThresholdKind::Sqrt ? "sqrt"
                       : kind == ThresholdKind::Log ? "log"
                                                    : "log2";
    return name + ":" + std::to_string(constant);
  }

  /// Parses "sqrt", "log", "log2", optionally followed by ":<constant>".
  static ThresholdSpec parse(const std::string& text) {
    ThresholdSpec spec;
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    if (name == "sqrt") {
      spec.kind = ThresholdKind::Sqrt;
    } else if (name == "log") {
      spec.kind = ThresholdKind::Log;
    } else if (name == "log2") {
      spec.kind = ThresholdKind::Log2;
    } else {
      throw Error(ErrorCode::ConfigInvalid, "unknown threshold '" + name + "'");
    }
    if (colon != std::string::npos) {
      try {
        std::size_t used = 0;
        spec.constant = std::stod(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "bad threshold constant in '" + text + "'");
      }
    }
    if (!(spec.constant > 0.0)) throw Error(ErrorCode::ConfigInvalid, "threshold constant must be > 0");
    return spec;
  }
};

inline constexpr double kDefaultCPrime = 0.11;

struct ExperimentConfig {
  std::vector<double> p_grid;
  std::vector<std::int64_t> N_grid;
  std::uint64_t replicas = 10'000;
  ThresholdSpec small;
  std::optional<double> cprime;  // default: theory value for p > 1/2, else 0.11
  std::uint64_t master_seed = 0;
  unsigned parallelism = 1;
  std::uint64_t round_cap = 1'000'000'000ULL;
};

inline double effective_cprime(const ExperimentConfig& config, double p) {
  if (config.cprime) return *config.cprime;
  return p > 0.5 && p < 1.0 ? linear_fraction(p) : kDefaultCPrime;
}

/// Limits of P(small) and P(large): (1-p)/p and (2p-1)/p above criticality,
/// 1 and 0 at or below it.
inline std::pair<double, double> theoretical_limits(double p) {
  if (p > 0.5) return {(1.0 - p) / p, (2.0 * p - 1.0) / p};
  return {1.0, 0.0};
}

struct CellStats {
  SimParams params;
  std::uint64_t cell_index = 0;
  std::uint64_t replicas = 0;
  double threshold_small = 0.0;
  double threshold_large = 0.0;
  std::uint64_t small = 0;
  std::uint64_t middle = 0;
  std::uint64_t large = 0;
  Interval ci_small;
  Interval ci_large;
  Interval ci_middle;
  double limit_small = 0.0;
  double limit_large = 0.0;
  double wall_ms = 0.0;
  std::optional<std::string> error;

  double p_small() const noexcept { return ratio(small); }
  double p_middle() const noexcept { return ratio(middle); }
  double p_large() const noexcept { return ratio(large); }

 private:
  double ratio(std::uint64_t c) const noexcept {
    return replicas ? static_cast<double>(c) / static_cast<double>(replicas) : 0.0;
  }
};

inline void validate(const ExperimentConfig& config) {
  if (config.replicas < 1) throw Error(ErrorCode::ConfigInvalid, "replicas must be >= 1");
  if (config.p_grid.empty() || config.N_grid.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "p and N grids must be non-empty");
  }
  for (const double p : config.p_grid) validate_params(p, 2);
  for (const auto N : config.N_grid) {
    validate_params(0.0, N);
    if (config.small.evaluate(N - 1) < 1.0) {
      throw Error(ErrorCode::ConfigInvalid, "small threshold " + config.small.to_string() +
                                                " is below 1 at N = " + std::to_string(N));
    }
  }
  if (config.cprime && !(*config.cprime > 0.0 && *config.cprime < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "c' must lie in (0, 1)");
  }
}

/// Band tallies for one (p, N) cell. A replica is "small" when
/// V_inf <= f(n), otherwise "large" when V_inf >= c' n, otherwise "middle",
/// so the three counts always add up to the replica count.
inline CellStats run_cell(const SimParams& params, const ExperimentConfig& config,
                          std::uint64_t cell_index) {
  if (config.replicas < 1) throw Error(ErrorCode::ConfigInvalid, "replicas must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  CellStats cell;
  cell.params = params;
  cell.params.seed = config.master_seed;
  cell.cell_index = cell_index;
  cell.replicas = config.replicas;
  cell.threshold_small = config.small.evaluate(params.n());
  if (cell.threshold_small < 1.0) {
    throw Error(ErrorCode::ConfigInvalid, "small threshold evaluates below 1");
  }
  cell.threshold_large = effective_cprime(config, params.p) * static_cast<double>(params.n());
  std::tie(cell.limit_small, cell.limit_large) = theoretical_limits(params.p);

  const std::uint64_t cell_seed = derive_seed(config.master_seed, cell_index);
  const Histogram h = parallel_tally<Histogram>(
      config.replicas, config.parallelism,
      [&](std::uint64_t i, Histogram& tally) {
        RngStream stream = substream(cell_seed, i);
        const AuxOptions options{config.round_cap, false};
        tally.add(
            with_replica_index(i, [&] { return run_auxiliary(params, stream, options); })
                .v_infinity);
      },
      Histogram(params.N));

  for (std::int64_t v = 1; v <= params.N; ++v) {
    const auto c = h.counts[static_cast<std::size_t>(v)];
    const double vd = static_cast<double>(v);
    if (vd <= cell.threshold_small) {
      cell.small += c;
    } else if (vd >= cell.threshold_large) {
      cell.large += c;
    } else {
      cell.middle += c;
    }
  }
  cell.ci_small = wilson_interval(cell.small, cell.replicas);
  cell.ci_large = wilson_interval(cell.large, cell.replicas);
  cell.ci_middle = wilson_interval(cell.middle, cell.replicas);
  cell.wall_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return cell;
}

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellStats> rows;  // sorted by (p, N)
};

/// Runs every (p, N) cell. A failing cell is kept as a row carrying its
/// error message and the sweep moves on.
inline ExperimentReport run_sweep(const ExperimentConfig& input) {
  validate(input);
  ExperimentReport report;
  report.config = input;
  auto& config = report.config;
  std::sort(config.p_grid.begin(), config.p_grid.end());
  config.p_grid.erase(std::unique(config.p_grid.begin(), config.p_grid.end()),
                      config.p_grid.end());
  std::sort(config.N_grid.begin(), config.N_grid.end());
  config.N_grid.erase(std::unique(config.N_grid.begin(), config.N_grid.end()),
                      config.N_grid.end());

  std::uint64_t cell_index = 0;
  for (const double p : config.p_grid) {
    for (const auto N : config.N_grid) {
      const SimParams params = validate_params(p, N, config.master_seed);
      try {
        report.rows.push_back(run_cell(params, config, cell_index));
      } catch (const Error& e) {
        CellStats failed;
        failed.params = params;
        failed.cell_index = cell_index;
        failed.replicas = config.replicas;
        failed.error = e.what();
        std::tie(failed.limit_small, failed.limit_large) = theoretical_limits(p);
        report.rows.push_back(failed);
      }
      ++cell_index;
    }
  }
  return report;
}

}  // namespace frogsim
