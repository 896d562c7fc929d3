#pragma once

// Galton-Watson comparison processes with offspring support {0, 1, 2},
// explored one individual per round, as the auxiliary process is.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "frogsim/model.hpp"
#include "frogsim/stats.hpp"

namespace frogsim {

struct OffspringLaw {
  double w0 = 1.0;
  double w1 = 0.0;
  double w2 = 0.0;

  static OffspringLaw make(double w0, double w1, double w2) {
    if (!(w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0) || std::abs(w0 + w1 + w2 - 1.0) > 1e-12) {
      throw Error(ErrorCode::DomainError, "offspring weights must be non-negative and sum to 1");
    }
    return OffspringLaw{w0, w1, w2};
  }

  double mean() const noexcept { return w1 + 2.0 * w2; }

  /// Probability generating function G(s) = w0 + w1 s + w2 s^2.
  double pgf(double s) const noexcept { return w0 + s * (w1 + s * w2); }

  /// Same threshold layout as the round sampler: 0 on [0,w0), 1 on
  /// [w0, w0+w1), 2 otherwise.
  int sample(double u) const noexcept {
    if (u < w0) return 0;
    return u < w0 + w1 ? 1 : 2;
  }
};

namespace detail {

inline void check_probability(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorCode::PInvalid, "p must lie in [0, 1), got " + std::to_string(p));
  }
}

inline OffspringLaw banded_law(double p, std::int64_t N, double band) {
  check_probability(p);
  if (N < 2) throw Error(ErrorCode::NInvalid, "N must be >= 2");
  const double n = static_cast<double>(N - 1);
  if (!(band >= 0.0 && band <= n)) {
    throw Error(ErrorCode::BandInvalid,
                "band " + std::to_string(band) + " outside [0, " + std::to_string(N - 1) + "]");
  }
  return OffspringLaw{1.0 - p, p * band / n, p * (n - band) / n};
}

}  // namespace detail

/// X+: every survivor counts as two children.
inline OffspringLaw law_xplus(double p) {
  detail::check_probability(p);
  return OffspringLaw{1.0 - p, 0.0, p};
}

/// X-: Revisit band frozen at k_minus.
inline OffspringLaw law_xminus(double p, std::int64_t N, double k_minus) {
  return detail::banded_law(p, N, k_minus);
}

/// Y: Revisit band frozen at k_plus.
inline OffspringLaw law_y(double p, std::int64_t N, double k_plus) {
  return detail::banded_law(p, N, k_plus);
}

struct BranchingRun {
  std::optional<std::uint64_t> r_rounds;  // extinction round; empty when capped
  std::int64_t total_individuals = 1;     // 1 + #{2-child rounds} so far
  bool capped = false;
  std::int64_t peak_alive = 1;
  std::uint64_t zero_child_rounds = 0;
  std::uint64_t two_child_rounds = 0;
};

struct BranchingOptions {
  std::uint64_t round_cap = 1'000'000;
  /// Stop and classify as surviving once this many individuals are alive at
  /// once; 0 disables. From a alive individuals, extinction has probability
  /// s^a, which bounds the misclassification.
  std::int64_t population_cap = 0;
};

inline BranchingRun run_branching(const OffspringLaw& law, RngStream& stream,
                                  const BranchingOptions& options = {}) {
  if (options.round_cap < 1) throw Error(ErrorCode::DomainError, "round_cap must be >= 1");
  BranchingRun run;
  std::int64_t alive = 1;
  for (std::uint64_t k = 1; k <= options.round_cap; ++k) {
    const int children = law.sample(stream.uniform());
    alive += children - 1;
    if (children == 0) ++run.zero_child_rounds;
    if (children == 2) {
      ++run.two_child_rounds;
      ++run.total_individuals;
      run.peak_alive = std::max(run.peak_alive, alive);
    }
    if (alive == 0) {
      run.r_rounds = k;
      return run;
    }
    if (options.population_cap > 0 && alive >= options.population_cap) break;
  }
  run.capped = true;
  return run;
}

/// Smallest root in (0, 1] of s = w0 + w1 s + w2 s^2. Since s = 1 is always a
/// root, Vieta gives the other one as w0 / w2 with no cancellation; it is the
/// answer exactly when the law is supercritical (w2 > w0).
inline double extinction_closed_form(const OffspringLaw& law) noexcept {
  if (law.w2 <= law.w0) return 1.0;  // mean <= 1, including w2 == 0
  return law.w0 / law.w2;
}

inline constexpr std::uint64_t kFixedPointMaxIterations = 100'000'000ULL;

/// Iterates s <- G(s) from s = 0. The sequence increases monotonically to the
/// smallest fixed point. Stops when the step, scaled by the observed
/// contraction ratio rho as step * rho / (1 - rho), is below tol.
inline double extinction_fixed_point(const OffspringLaw& law, double tol,
                                     std::uint64_t max_iterations = kFixedPointMaxIterations) {
  if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tol must be positive");
  double s = 0.0;
  double last_step = 0.0;
  for (std::uint64_t i = 0; i < max_iterations; ++i) {
    const double next = law.pgf(s);
    const double step = next - s;
    s = next;
    if (step <= 0.0 || s >= 1.0) return std::min(s, 1.0);
    if (last_step > 0.0) {
      const double rho = step / last_step;
      if (rho < 1.0 && step * rho / (1.0 - rho) < tol) return s;
    }
    last_step = step;
  }
  throw Error(ErrorCode::NoConvergence,
              "fixed-point iteration did not converge in " + std::to_string(max_iterations) +
                  " iterations");
}

/// Estimate of P(k_minus < R+ < infinity) for the X+ process.
struct BPlusEstimate {
  std::uint64_t hits = 0;
  std::uint64_t replicas = 0;
  std::uint64_t capped = 0;
  double estimate = 0.0;
  Interval ci;
  /// Upper bound on the chance that a single capped run would still have
  /// gone extinct.
  double misclassification_bound = 0.0;
};

/// Population level above which a run of `law` is classified as surviving
/// with misclassification probability below `eps`.
inline std::int64_t survival_population_cap(const OffspringLaw& law, double eps = 1e-12) {
  const double s = extinction_closed_form(law);
  if (s >= 1.0) return 0;
  if (s <= 0.0) return 1;
  return static_cast<std::int64_t>(std::ceil(std::log(eps) / std::log(s)));
}

inline BPlusEstimate bplus_statistic(double p, std::int64_t N, double k_minus,
                                     std::uint64_t replicas, RngStream& stream) {
  if (replicas == 0) throw Error(ErrorCode::EmptyRun, "replicas must be >= 1");
  detail::check_probability(p);
  if (N < 2) throw Error(ErrorCode::NInvalid, "N must be >= 2");
  if (k_minus < 0.0) throw Error(ErrorCode::BandInvalid, "k_minus must be >= 0");
  const OffspringLaw law = law_xplus(p);
  BranchingOptions options;
  options.round_cap = std::max<std::uint64_t>(
      1'000'000ULL, static_cast<std::uint64_t>(std::ceil(100.0 * k_minus)));
  options.population_cap = survival_population_cap(law);
  BPlusEstimate est;
  est.replicas = replicas;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    const BranchingRun run = run_branching(law, stream, options);
    if (run.capped) {
      ++est.capped;
    } else if (static_cast<double>(*run.r_rounds) > k_minus) {
      ++est.hits;
    }
  }
  est.estimate = static_cast<double>(est.hits) / static_cast<double>(replicas);
  est.ci = wilson_interval(est.hits, replicas);
  const double s = extinction_closed_form(law);
  est.misclassification_bound =
      options.population_cap > 0 ? std::pow(s, static_cast<double>(options.population_cap))
                                 : 0.0;
  return est;
}

}  // namespace frogsim
