#pragma once

// Command-line front end. Kept in a header so tests can drive run_cli()
// in-process.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "frogsim/frogsim.hpp"

namespace frogsim::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kRuntime = 2,
  kVerificationFailed = 3,
};

inline int verification_exit_code(bool passed) { return passed ? kOk : kVerificationFailed; }

enum class Format { Human, Csv, Json };

struct Common {
  std::optional<std::uint64_t> seed_flag;
  std::string format = "human";
  std::string out_path;
  unsigned parallel = 1;

  Format fmt() const {
    if (format == "csv") return Format::Csv;
    if (format == "json") return Format::Json;
    return Format::Human;
  }
};

/// Flag value, else FROGSIM_SEED, else 0.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FROGSIM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::ConfigInvalid, std::string("FROGSIM_SEED is not an integer: ") + env);
  }
  return 0;
}

namespace detail {

/// Writes to --out when given, else to the default stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::ConfigInvalid, "cannot open output file " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

inline Json base_config(const std::string& command, std::uint64_t seed) {
  return Json{{"command", command}, {"version", std::string(kVersion)}, {"seed", seed}};
}

inline void csv_preamble(std::ostream& out, const Json& config) {
  out << "# frogsim";
  for (const auto& [key, value] : config.items()) out << ' ' << key << '=' << value.dump();
  out << '\n';
}

inline void human_preamble(std::ostream& out, const Json& config) {
  out << "frogsim " << kVersion << " " << config.value("command", std::string()) << '\n';
  for (const auto& [key, value] : config.items()) {
    if (key == "command" || key == "version") continue;
    out << "  " << key << " = " << value.dump() << '\n';
  }
}

inline std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, "bad number in list: '" + item + "'");
    }
  }
  return out;
}

inline std::vector<std::int64_t> parse_ints(const std::string& text) {
  std::vector<std::int64_t> out;
  for (const double d : parse_doubles(text)) {
    if (d != std::floor(d)) throw Error(ErrorCode::ConfigInvalid, "expected integer list");
    out.push_back(static_cast<std::int64_t>(d));
  }
  return out;
}

inline void write_histogram(std::ostream& out, Format fmt, const Json& config,
                            const Histogram& h, std::uint64_t replicas) {
  Json rows = Json::array();
  for (std::size_t v = 1; v < h.counts.size(); ++v) {
    if (h.counts[v] == 0) continue;
    rows.push_back(Json{{"v", v},
                        {"count", h.counts[v]},
                        {"freq", static_cast<double>(h.counts[v]) / static_cast<double>(replicas)}});
  }
  double mean = 0.0;
  for (std::size_t v = 1; v < h.counts.size(); ++v) {
    mean += static_cast<double>(v) * static_cast<double>(h.counts[v]);
  }
  mean /= static_cast<double>(replicas);
  switch (fmt) {
    case Format::Json:
      out << Json{{"config", config}, {"mean_v_infinity", mean}, {"histogram", rows}}.dump(2)
          << '\n';
      break;
    case Format::Csv:
      csv_preamble(out, config);
      out << "v,count,freq\n";
      for (const auto& r : rows) {
        out << r["v"].get<std::size_t>() << ',' << r["count"].get<std::uint64_t>() << ','
            << r["freq"].get<double>() << '\n';
      }
      break;
    case Format::Human:
      human_preamble(out, config);
      out << "mean v_infinity = " << mean << '\n';
      for (const auto& r : rows) {
        out << "  v = " << r["v"].get<std::size_t>() << "  count = "
            << r["count"].get<std::uint64_t>() << "  freq = " << r["freq"].get<double>() << '\n';
      }
      break;
  }
}

inline void write_trajectory(std::ostream& out, Format fmt, const Json& config,
                             const Trajectory& t) {
  const Json body = to_json(t);
  switch (fmt) {
    case Format::Json:
      out << Json{{"config", config}, {"trajectory", body}}.dump(2) << '\n';
      break;
    case Format::Csv:
      csv_preamble(out, config);
      out << "v_infinity,r_rounds,peak_active,deaths,revisits,new_vertices\n"
          << t.v_infinity << ',' << t.r_rounds << ',' << t.peak_active << ',' << t.deaths << ','
          << t.revisits << ',' << t.new_vertices << '\n';
      break;
    case Format::Human:
      human_preamble(out, config);
      out << "v_infinity = " << t.v_infinity << '\n'
          << "r_rounds = " << t.r_rounds << '\n'
          << "peak_active = " << t.peak_active << '\n';
      break;
  }
}

/// Key/value results (constants, checks) in any format.
inline void write_record(std::ostream& out, Format fmt, const Json& config, const Json& record,
                         const std::string& key) {
  switch (fmt) {
    case Format::Json:
      out << Json{{"config", config}, {key, record}}.dump(2) << '\n';
      break;
    case Format::Csv: {
      csv_preamble(out, config);
      std::string header;
      std::string values;
      for (const auto& [k, v] : record.flatten().items()) {
        header += (header.empty() ? "" : ",") + k.substr(1);
        values += (values.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      }
      out << header << '\n' << values << '\n';
      break;
    }
    case Format::Human:
      human_preamble(out, config);
      for (const auto& [k, v] : record.flatten().items()) {
        out << "  " << k.substr(1) << " = " << v.dump() << '\n';
      }
      break;
  }
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"frogsim: frog model on complete graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed_flag, "Master seed (default: $FROGSIM_SEED or 0)");
    sub->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"human", "csv", "json"}));
    sub->add_option("--out", common.out_path, "Output file (default: stdout)");
  };
  const auto add_parallel = [&](CLI::App* sub) {
    sub->add_option("--parallel", common.parallel, "Worker threads")->check(CLI::Range(1U, 1024U));
  };

  double p = 0.0;
  std::int64_t N = 0;
  std::uint64_t replicas = 1;
  std::uint64_t round_cap = 1'000'000'000ULL;

  auto* simulate = app.add_subcommand("simulate", "Run the auxiliary round process");
  simulate->add_option("--p", p, "Survival probability")->required();
  simulate->add_option("--N", N, "Vertices of the complete graph")->required();
  simulate->add_option("--replicas", replicas, "Independent runs")->check(CLI::PositiveNumber);
  simulate->add_option("--round-cap", round_cap, "Safety cap on rounds per run");
  add_common(simulate);
  add_parallel(simulate);

  std::string graph_kind = "complete";
  std::string graph_file;
  std::string schedule = "queue";
  auto* frog = app.add_subcommand("frog", "Run the particle-level frog model");
  frog->add_option("--p", p, "Survival probability")->required();
  frog->add_option("--N", N, "Vertex count for generated graphs");
  frog->add_option("--graph", graph_kind, "Generated graph family")
      ->check(CLI::IsMember({"complete", "cycle", "path"}));
  frog->add_option("--graph-file", graph_file, "Edge list: 'N M root' then M lines 'u v'");
  frog->add_option("--schedule", schedule, "Particle scheduling")
      ->check(CLI::IsMember({"queue", "simultaneous"}));
  frog->add_option("--replicas", replicas, "Independent runs")->check(CLI::PositiveNumber);
  frog->add_option("--round-cap", round_cap, "Safety cap on steps per run");
  add_common(frog);
  add_parallel(frog);

  std::int64_t max_n = kExactDefaultMaxN;
  std::optional<std::int64_t> tail_threshold;
  auto* exact = app.add_subcommand("exact", "Exact pmf of V_inf on K_N");
  exact->add_option("--p", p, "Survival probability")->required();
  exact->add_option("--N", N, "Vertices of the complete graph")->required();
  exact->add_option("--max-n", max_n, "Feasibility bound on N");
  exact->add_option("--tail", tail_threshold, "Also report P(V_inf <= tail)");
  add_common(exact);

  std::string law_name = "xplus";
  std::optional<double> band;
  double tol = 1e-12;
  bool bplus = false;
  std::uint64_t branching_cap = 1'000'000;
  auto* branching = app.add_subcommand("branching", "Comparison branching processes");
  branching->add_option("--p", p, "Survival probability")->required();
  branching->add_option("--N", N, "Vertices (for banded laws and k_minus)");
  branching->add_option("--law", law_name, "Offspring law")
      ->check(CLI::IsMember({"xplus", "xminus", "y"}));
  branching->add_option("--band", band, "Revisit band (default: k_minus or k_plus)");
  branching->add_option("--replicas", replicas, "Simulated runs (0: formulas only)");
  branching->add_option("--round-cap", branching_cap, "Rounds before a run counts as surviving");
  branching->add_option("--tol", tol, "Fixed-point tolerance")->check(CLI::PositiveNumber);
  branching->add_flag("--bplus", bplus, "Estimate P(k_minus < R+ < inf)");
  add_common(branching);

  auto* constants = app.add_subcommand("constants", "Constants of the supercritical analysis");
  constants->add_option("--p", p, "Survival probability")->required();
  constants->add_option("--N", N, "Vertices")->required();
  add_common(constants);

  std::optional<std::uint64_t> chain_k;
  auto* chain = app.add_subcommand("chain", "Evaluate the bound chain for P(A'_k <= a_k + 1)");
  chain->add_option("--p", p, "Survival probability")->required();
  chain->add_option("--N", N, "Vertices")->required();
  chain->add_option("--k", chain_k, "Round (default: ceil(k_minus))");
  chain->add_option("--replicas", replicas, "Monte Carlo runs")->check(CLI::PositiveNumber);
  add_common(chain);

  std::string p_grid;
  std::string n_grid;
  std::string threshold = "sqrt";
  std::optional<double> cprime;
  auto* sweep = app.add_subcommand("sweep", "Band probabilities over a (p, N) grid");
  sweep->add_option("--p", p_grid, "Comma-separated p values")->required();
  sweep->add_option("--N", n_grid, "Comma-separated N values")->required();
  sweep->add_option("--replicas", replicas, "Runs per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--threshold", threshold, "Small threshold {sqrt|log|log2}[:const]");
  sweep->add_option("--cprime", cprime, "Linear fraction c' for the large band");
  sweep->add_option("--round-cap", round_cap, "Safety cap on rounds per run");
  add_common(sweep);
  add_parallel(sweep);

  std::optional<std::uint64_t> max_rounds;
  auto* couple = app.add_subcommand("couple-check", "Verify the pathwise couplings");
  couple->add_option("--p", p, "Survival probability")->required();
  couple->add_option("--N", N, "Vertices")->required();
  couple->add_option("--replicas", replicas, "Coupled runs")->check(CLI::PositiveNumber);
  couple->add_option("--max-rounds", max_rounds, "Rounds per run (default 10 N)");
  add_common(couple);
  add_parallel(couple);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    const std::uint64_t seed = resolve_seed(common.seed_flag);
    const Format fmt = common.fmt();
    detail::Sink sink(common.out_path, out);
    std::ostream& os = sink.get();

    if (*simulate) {
      const SimParams params = validate_params(p, N, seed);
      Json config = detail::base_config("simulate", seed);
      config.update(Json{{"p", p}, {"N", N}, {"replicas", replicas}, {"round_cap", round_cap}});
      const AuxOptions options{round_cap, false};
      if (replicas == 1) {
        RngStream stream = substream(seed, 0);
        detail::write_trajectory(os, fmt, config, run_auxiliary(params, stream, options));
      } else {
        config["parallel"] = common.parallel;
        const Histogram h = aux_histogram(params, replicas, seed, common.parallel, options);
        detail::write_histogram(os, fmt, config, h, replicas);
      }
      return kOk;
    }

    if (*frog) {
      Graph graph = [&] {
        if (!graph_file.empty()) {
          std::ifstream in(graph_file);
          if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + graph_file);
          return read_edge_list(in);
        }
        if (graph_kind == "cycle") return make_cycle(N);
        if (graph_kind == "path") return make_path(N);
        return make_complete(N);
      }();
      const FrogOptions options{
          schedule == "queue" ? Schedule::Queue : Schedule::Simultaneous, round_cap};
      Json config = detail::base_config("frog", seed);
      config.update(Json{{"p", p},
                         {"N", graph.size()},
                         {"graph", graph_file.empty() ? graph_kind : "file:" + graph_file},
                         {"schedule", schedule},
                         {"replicas", replicas},
                         {"round_cap", round_cap}});
      if (replicas == 1) {
        RngStream stream = substream(seed, 0);
        detail::write_trajectory(os, fmt, config, run_frog(graph, p, stream, options));
      } else {
        config["parallel"] = common.parallel;
        const Histogram h = parallel_tally<Histogram>(
            replicas, common.parallel,
            [&](std::uint64_t i, Histogram& tally) {
              RngStream stream = substream(seed, i);
              tally.add(with_replica_index(i, [&] { return run_frog(graph, p, stream, options); })
                            .v_infinity);
            },
            Histogram(graph.size()));
        detail::write_histogram(os, fmt, config, h, replicas);
      }
      return kOk;
    }

    if (*exact) {
      const SimParams params = validate_params(p, N, seed);
      const PmfTable table = exact_pmf(params, max_n);
      Json config = detail::base_config("exact", seed);
      config.update(Json{{"p", p}, {"N", N}, {"max_n", max_n}});
      std::optional<double> tail;
      if (tail_threshold) {
        tail = exact_tail(table, *tail_threshold);
        config["tail_threshold"] = *tail_threshold;
      }
      switch (fmt) {
        case Format::Json: {
          Json body{{"config", config}, {"pmf", to_json(table)}, {"total", table.total()}};
          if (tail) body["tail"] = *tail;
          os << body.dump(2) << '\n';
          break;
        }
        case Format::Csv:
          detail::csv_preamble(os, config);
          write_csv(os, table);
          break;
        case Format::Human:
          detail::human_preamble(os, config);
          os.precision(17);
          for (std::int64_t v = 1; v <= table.N; ++v) {
            os << "  P(V_inf = " << v << ") = " << table.at(v) << '\n';
          }
          if (tail) os << "  P(V_inf <= " << *tail_threshold << ") = " << *tail << '\n';
          break;
      }
      return kOk;
    }

    if (*branching) {
      Json config = detail::base_config("branching", seed);
      config.update(Json{{"p", p}, {"law", law_name}, {"replicas", replicas},
                         {"round_cap", branching_cap}, {"tol", tol}});
      const auto default_constants = [&] { return compute_constants(p, N); };
      OffspringLaw law = law_xplus(p);
      if (law_name != "xplus") {
        validate_params(p, N);
        const double b = band ? *band
                              : (law_name == "xminus" ? default_constants().k_minus
                                                      : default_constants().k_plus);
        law = law_name == "xminus" ? law_xminus(p, N, b) : law_y(p, N, b);
        config["N"] = N;
        config["band"] = b;
      }
      Json record{{"w0", law.w0},
                  {"w1", law.w1},
                  {"w2", law.w2},
                  {"mean", law.mean()},
                  {"extinction_closed_form", extinction_closed_form(law)},
                  {"extinction_fixed_point", extinction_fixed_point(law, tol)}};
      if (replicas > 0) {
        BranchingOptions options;
        options.round_cap = branching_cap;
        options.population_cap = survival_population_cap(law);
        std::uint64_t extinct = 0;
        for (std::uint64_t i = 0; i < replicas; ++i) {
          RngStream stream = substream(seed, i);
          if (!run_branching(law, stream, options).capped) ++extinct;
        }
        const Interval ci = wilson_interval(extinct, replicas);
        record["extinct_fraction"] = static_cast<double>(extinct) / static_cast<double>(replicas);
        record["extinct_lo"] = ci.lo;
        record["extinct_hi"] = ci.hi;
        record["population_cap"] = options.population_cap;
      }
      if (bplus) {
        const double k_minus = default_constants().k_minus;
        config["N"] = N;
        RngStream stream = substream(seed, replicas + 1);
        const BPlusEstimate est = bplus_statistic(p, N, k_minus, std::max<std::uint64_t>(replicas, 1), stream);
        record["bplus"] = Json{{"k_minus", k_minus},
                               {"estimate", est.estimate},
                               {"lo", est.ci.lo},
                               {"hi", est.ci.hi},
                               {"capped", est.capped},
                               {"misclassification_bound", est.misclassification_bound}};
      }
      detail::write_record(os, fmt, config, record, "branching");
      return kOk;
    }

    if (*constants) {
      Json config = detail::base_config("constants", seed);
      config.update(Json{{"p", p}, {"N", N}});
      detail::write_record(os, fmt, config, to_json(compute_constants(p, N)), "constants");
      return kOk;
    }

    if (*chain) {
      const TheoryConstants tc = compute_constants(p, N);
      const std::uint64_t k =
          chain_k ? *chain_k : static_cast<std::uint64_t>(std::ceil(tc.k_minus));
      Json config = detail::base_config("chain", seed);
      config.update(Json{{"p", p}, {"N", N}, {"k", k}, {"replicas", replicas}});
      const ChainReport report = bound_chain_eval(p, N, k, replicas, seed);
      detail::write_record(os, fmt, config, to_json(report), "chain");
      return verification_exit_code(report.ordered);
    }

    if (*sweep) {
      ExperimentConfig config;
      config.p_grid = detail::parse_doubles(p_grid);
      config.N_grid = detail::parse_ints(n_grid);
      config.replicas = replicas;
      config.small = ThresholdSpec::parse(threshold);
      config.cprime = cprime;
      config.master_seed = seed;
      config.parallelism = common.parallel;
      config.round_cap = round_cap;
      const ExperimentReport report = run_sweep(config);
      Json cfg = config_json(report.config);
      cfg["command"] = "sweep";
      switch (fmt) {
        case Format::Json:
          os << to_json(report).dump(2) << '\n';
          break;
        case Format::Csv:
          detail::csv_preamble(os, cfg);
          write_csv(os, report);
          break;
        case Format::Human:
          detail::human_preamble(os, cfg);
          for (const auto& row : report.rows) {
            os << "  p = " << row.params.p << "  N = " << row.params.N;
            if (row.error) {
              os << "  FAILED: " << *row.error << '\n';
              continue;
            }
            os << "  small(<= " << row.threshold_small << ") = " << row.p_small() << " ["
               << row.ci_small.lo << ", " << row.ci_small.hi << "]"
               << "  large(>= " << row.threshold_large << ") = " << row.p_large() << " ["
               << row.ci_large.lo << ", " << row.ci_large.hi << "]"
               << "  middle = " << row.p_middle() << "  limits = (" << row.limit_small << ", "
               << row.limit_large << ")\n";
          }
          if (report.config.p_grid.back() > 0.5) {
            const auto tc = compute_constants(report.config.p_grid.back(),
                                              std::max<std::int64_t>(report.config.N_grid.back(), 3));
            os << "  exact constants at p = " << tc.p << ", N = " << tc.n + 1
               << ": k_minus = " << tc.k_minus << ", c' = " << tc.c_prime << '\n';
          }
          break;
      }
      for (const auto& row : report.rows) {
        if (row.error) return kRuntime;
      }
      return kOk;
    }

    if (*couple) {
      const SimParams params = validate_params(p, N, seed);
      const TheoryConstants tc = compute_constants(p, N);
      const std::uint64_t rounds =
          max_rounds ? *max_rounds : static_cast<std::uint64_t>(10 * N);
      const CouplingBands bands{tc.k_minus, tc.k_plus};
      const CouplingCheck check = parallel_tally<CouplingCheck>(
          replicas, common.parallel, [&](std::uint64_t i, CouplingCheck& tally) {
            RngStream stream = substream(seed, i);
            tally += check_coupled_replica(params, stream, bands, rounds);
          });
      Json config = detail::base_config("couple-check", seed);
      config.update(Json{{"p", p},
                         {"N", N},
                         {"replicas", replicas},
                         {"max_rounds", rounds},
                         {"k_minus", tc.k_minus},
                         {"k_plus", tc.k_plus}});
      detail::write_record(os, fmt, config, to_json(check), "coupling");
      return verification_exit_code(check.clean());
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace frogsim::cli
