#pragma once

// Constants and inequalities of the supercritical analysis, evaluated
// numerically. All logarithms are natural.

#include <cmath>
#include <cstdint>
#include <string>

#include "frogsim/aux_process.hpp"
#include "frogsim/model.hpp"
#include "frogsim/stats.hpp"

namespace frogsim {

struct TheoryConstants {
  double p = 0.0;
  std::int64_t n = 0;
  double k_minus = 0.0;
  double k_plus = 0.0;
  double a_coeff = 0.0;  // a_k = a_coeff * k
  double c_prime = 0.0;
  double limit_small = 0.0;  // (1-p)/p
  double limit_large = 0.0;  // (2p-1)/p
  /// Coefficient of log n in k_minus, used as the constant c of the
  /// small-mode limit.
  double c = 0.0;
  /// (2p-1)/(8p+4): the per-round Chernoff deviation.
  double deviation = 0.0;
  /// k_minus <= k_plus; false outside the asymptotic regime.
  bool feasible = false;

  double a_k(double k) const noexcept { return a_coeff * k; }
};

inline double k_minus_coefficient(double p) noexcept {
  const double dev = (2.0 * p - 1.0) / (8.0 * p + 4.0);
  return 2.0 * 4.0 * p / ((1.0 + 2.0 * p) * dev * dev);
}

/// c' = (k_plus + a_{k_plus}) / (2n), which does not depend on n.
inline double linear_fraction(double p) noexcept {
  const double kplus_over_n = 1.0 - 2.0 / (1.0 + 2.0 * p);
  const double a_coeff = 2.0 * p / (1.0 + 2.0 * p) - 0.5;
  return (kplus_over_n + a_coeff * kplus_over_n) / 2.0;
}

/// Requires 1/2 < p < 1 and N >= 3 (so that log n > 0).
inline TheoryConstants compute_constants(double p, std::int64_t N) {
  if (!(p < 1.0) || std::isnan(p)) {
    throw Error(ErrorCode::PInvalid, "p must be < 1, got " + std::to_string(p));
  }
  if (!(p > 0.5)) {
    throw Error(ErrorCode::SubcriticalP, "constants exist only for p > 1/2, got " +
                                             std::to_string(p));
  }
  if (N < 3) throw Error(ErrorCode::NInvalid, "need N >= 3 so that log(N-1) > 0");
  TheoryConstants t;
  t.p = p;
  t.n = N - 1;
  const double n = static_cast<double>(t.n);
  t.deviation = (2.0 * p - 1.0) / (8.0 * p + 4.0);
  t.c = k_minus_coefficient(p);
  t.k_minus = t.c * std::log(n);
  t.k_plus = (1.0 - 2.0 / (1.0 + 2.0 * p)) * n;
  t.a_coeff = 2.0 * p / (1.0 + 2.0 * p) - 0.5;
  t.c_prime = (t.k_plus + t.a_coeff * t.k_plus) / (2.0 * n);
  t.limit_small = (1.0 - p) / p;
  t.limit_large = (2.0 * p - 1.0) / p;
  t.feasible = t.k_minus <= t.k_plus;
  return t;
}

/// Chernoff lower-tail bound for X ~ Bin(n_trials, q):
/// P(X <= E X - t) <= exp(-t^2 / (2 E X)).
inline double chernoff_lower_tail(std::uint64_t n_trials, double q, double t) {
  if (n_trials < 1 || !(q > 0.0 && q <= 1.0) || !(t > 0.0)) {
    throw Error(ErrorCode::DomainError, "need n_trials >= 1, q in (0,1], t > 0");
  }
  const double mean = static_cast<double>(n_trials) * q;
  return std::exp(-t * t / (2.0 * mean));
}

struct ChainStep {
  double value = 0.0;
  double sigma = 0.0;  // zero for analytic steps
};

/// The bound chain for P(A'_k <= a_k + 1), from the simulated event down to
/// n^-2. Empirical steps come from shared-uniform coupled runs.
struct ChainReport {
  TheoryConstants constants;
  std::uint64_t k = 0;
  double a_k = 0.0;
  std::uint64_t replicas = 0;
  ChainStep actual;        // P(A'_k <= a_k + 1)
  ChainStep y_sum;         // P(sum Y_j <= k + a_k)
  ChainStep y_new;         // P(#{Y_j = 2} <= (k + a_k) / 2)
  ChainStep chernoff;      // exp(-k dev^2 / (2 p (1 - k_plus/n)))
  ChainStep final_bound;   // exp(-k_minus dev^2 (1+2p) / (4p)) = n^-2
  double n_inverse_square = 0.0;
  bool ordered = false;
};

inline ChainReport bound_chain_eval(double p, std::int64_t N, std::uint64_t k,
                                    std::uint64_t replicas, std::uint64_t master_seed) {
  const TheoryConstants tc = compute_constants(p, N);
  const double kd = static_cast<double>(k);
  if (kd < tc.k_minus || kd > tc.k_plus) {
    throw Error(ErrorCode::RangeError, "k = " + std::to_string(k) + " outside [k_minus, k_plus] = [" +
                                           std::to_string(tc.k_minus) + ", " +
                                           std::to_string(tc.k_plus) + "]");
  }
  if (replicas == 0) throw Error(ErrorCode::EmptyRun, "replicas must be >= 1");
  const SimParams params = validate_params(p, N, master_seed);
  const CouplingBands bands{tc.k_minus, tc.k_plus};
  const double a_k = tc.a_k(kd);

  std::uint64_t hit_actual = 0;
  std::uint64_t hit_y = 0;
  std::uint64_t hit_y_new = 0;
  for (std::uint64_t i = 0; i < replicas; ++i) {
    RngStream stream = substream(master_seed, i);
    const auto summary = run_coupled(params, stream, bands, CoupledOptions{k, false},
                                     [](const auto&, const auto&, const auto&) {});
    const auto& t = summary.final_tracks;
    if (static_cast<double>(t.a) <= a_k + 1.0) ++hit_actual;
    if (static_cast<double>(t.y_sum) <= kd + a_k) ++hit_y;
    if (static_cast<double>(t.y_new) <= 0.5 * (kd + a_k)) ++hit_y_new;
  }

  ChainReport r;
  r.constants = tc;
  r.k = k;
  r.a_k = a_k;
  r.replicas = replicas;
  const auto empirical = [&](std::uint64_t hits) {
    const double phat = static_cast<double>(hits) / static_cast<double>(replicas);
    return ChainStep{phat, binomial_sigma(phat, replicas)};
  };
  r.actual = empirical(hit_actual);
  r.y_sum = empirical(hit_y);
  r.y_new = empirical(hit_y_new);
  const double n = static_cast<double>(tc.n);
  const double dev2 = tc.deviation * tc.deviation;
  r.chernoff.value = std::exp(-kd * dev2 / (2.0 * p * (1.0 - tc.k_plus / n)));
  r.final_bound.value = std::exp(-tc.k_minus * dev2 * (1.0 + 2.0 * p) / (4.0 * p));
  r.n_inverse_square = 1.0 / (n * n);

  // Each step must not fall below the previous empirical step minus 3 sigma;
  // the last link compares two analytic values.
  const auto holds = [](const ChainStep& prev, const ChainStep& next) {
    return next.value >= prev.value - 3.0 * prev.sigma - 1e-15;
  };
  r.ordered = holds(r.actual, r.y_sum) && holds(r.y_sum, r.y_new) &&
              holds(r.y_new, r.chernoff) &&
              r.final_bound.value >= r.chernoff.value * (1.0 - 1e-12);
  return r;
}

}  // namespace frogsim
