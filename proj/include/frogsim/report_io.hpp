#pragma once

// CSV and JSON serialization of results.

#include <cmath>
#include <limits>
#include <sstream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "frogsim/aux_process.hpp"
#include "frogsim/branching.hpp"
#include "frogsim/exact.hpp"
#include "frogsim/experiments.hpp"
#include "frogsim/theory.hpp"

namespace frogsim {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportCsvHeader =
    "p,N,replicas,threshold_small,threshold_large,p_small,lo_small,hi_small,"
    "p_large,lo_large,hi_large,p_middle,limit_small,limit_large,wall_ms";

inline Json to_json(const TheoryConstants& t) {
  return Json{{"p", t.p},
              {"n", t.n},
              {"N", t.n + 1},
              {"k_minus", t.k_minus},
              {"k_plus", t.k_plus},
              {"a_coeff", t.a_coeff},
              {"c_prime", t.c_prime},
              {"c", t.c},
              {"deviation", t.deviation},
              {"limit_small", t.limit_small},
              {"limit_large", t.limit_large},
              {"feasible", t.feasible}};
}

inline Json to_json(const PmfTable& table) {
  Json mass = Json::array();
  for (const double m : table.mass) mass.push_back(m);
  return Json{{"p", table.p}, {"N", table.N}, {"mass", mass}};
}

inline Json to_json(const Trajectory& t) {
  return Json{{"p", t.params.p},
              {"N", t.params.N},
              {"seed", t.params.seed},
              {"v_infinity", t.v_infinity},
              {"r_rounds", t.r_rounds},
              {"peak_active", t.peak_active},
              {"deaths", t.deaths},
              {"revisits", t.revisits},
              {"new_vertices", t.new_vertices}};
}

inline Json to_json(const ChainStep& s) { return Json{{"value", s.value}, {"sigma", s.sigma}}; }

inline Json to_json(const ChainReport& r) {
  return Json{{"constants", to_json(r.constants)},
              {"k", r.k},
              {"a_k", r.a_k},
              {"replicas", r.replicas},
              {"actual", to_json(r.actual)},
              {"y_sum", to_json(r.y_sum)},
              {"y_new", to_json(r.y_new)},
              {"chernoff", to_json(r.chernoff)},
              {"final_bound", to_json(r.final_bound)},
              {"n_inverse_square", r.n_inverse_square},
              {"ordered", r.ordered}};
}

inline Json to_json(const CouplingCheck& c) {
  return Json{{"replicas", c.replicas},
              {"rounds_checked", c.rounds_checked},
              {"outcome_order", c.outcome_order},
              {"track_order", c.track_order},
              {"y_order", c.y_order},
              {"x_plus_range", c.x_plus_range},
              {"absorption_order", c.absorption_order},
              {"coverage_order", c.coverage_order},
              {"unresolved", c.unresolved},
              {"violations", c.violations()}};
}

namespace detail {

// JSON has no NaN; failed rows carry null.
inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const CellStats& c) {
  const bool ok = !c.error.has_value();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto val = [&](double x) { return detail::number_or_null(ok ? x : nan); };
  Json row{{"p", c.params.p},
           {"N", c.params.N},
           {"replicas", c.replicas},
           {"threshold_small", val(c.threshold_small)},
           {"threshold_large", val(c.threshold_large)},
           {"p_small", val(c.p_small())},
           {"lo_small", val(c.ci_small.lo)},
           {"hi_small", val(c.ci_small.hi)},
           {"p_large", val(c.p_large())},
           {"lo_large", val(c.ci_large.lo)},
           {"hi_large", val(c.ci_large.hi)},
           {"p_middle", val(c.p_middle())},
           {"limit_small", c.limit_small},
           {"limit_large", c.limit_large},
           {"wall_ms", val(c.wall_ms)}};
  if (c.error) row["error"] = *c.error;
  return row;
}

inline Json config_json(const ExperimentConfig& config) {
  Json cprime = config.cprime ? Json(*config.cprime) : Json("default");
  return Json{{"version", std::string(kVersion)},
              {"p_grid", config.p_grid},
              {"N_grid", config.N_grid},
              {"replicas", config.replicas},
              {"threshold", config.small.to_string()},
              {"cprime", cprime},
              {"seed", config.master_seed},
              {"parallel", config.parallelism}};
}

inline Json to_json(const ExperimentReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) rows.push_back(to_json(r));
  return Json{{"config", config_json(report.config)}, {"rows", rows}};
}

/// One row per cell under kReportCsvHeader. Failed cells print "nan" in every
/// measured column.
inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  const auto old_precision = out.precision(10);
  out << kReportCsvHeader << '\n';
  for (const auto& c : report.rows) {
    const bool ok = !c.error.has_value();
    const auto v = [&](double x) -> std::string {
      if (!ok) return "nan";
      std::ostringstream s;
      s.precision(10);
      s << x;
      return s.str();
    };
    out << c.params.p << ',' << c.params.N << ',' << c.replicas << ',' << v(c.threshold_small)
        << ',' << v(c.threshold_large) << ',' << v(c.p_small()) << ',' << v(c.ci_small.lo)
        << ',' << v(c.ci_small.hi) << ',' << v(c.p_large()) << ',' << v(c.ci_large.lo) << ','
        << v(c.ci_large.hi) << ',' << v(c.p_middle()) << ',' << c.limit_small << ','
        << c.limit_large << ',' << v(c.wall_ms) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace frogsim
