#pragma once

// Exact law of V_inf on K_N by dynamic programming over the absorbing chain
// (A', V').
//
// A Revisit round changes neither A' nor V', so the self-loop is summed out:
// from visited count v an effective step is a death with probability
//   q(v) = (1-p) / (1 - p(v-1)/n)
// and otherwise a NewVertex. With F(a, v) the law of the final visited count
// started from (a, v):
//   F(0, v) = delta_v,   F(a, N) = delta_N  (a >= 1),
//   F(a, v) = q(v) F(a-1, v) + (1-q(v)) F(a+1, v+1).
// Only a <= v is reachable from (1, 1). Layers are evaluated from v = N down
// to 1, keeping one layer of pmfs alive: O(N^2) memory, O(N^3) time.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "frogsim/model.hpp"

namespace frogsim {

inline constexpr std::int64_t kExactDefaultMaxN = 500;

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct PmfTable {
  std::int64_t N = 0;
  double p = 0.0;
  std::vector<double> mass;  // mass[v - 1] = P(V_inf = v), v = 1..N

  double at(std::int64_t v) const { return mass.at(static_cast<std::size_t>(v - 1)); }

  double total() const noexcept {
    CompensatedSum s;
    for (const double m : mass) s.add(m);
    return s.value();
  }
};

inline PmfTable exact_pmf(const SimParams& params, std::int64_t max_n = kExactDefaultMaxN) {
  const std::int64_t N = params.N;
  if (N > max_n) {
    throw Error(ErrorCode::FeasibilityExceeded,
                "exact pmf needs O(N^3) time; N = " + std::to_string(N) +
                    " is above the bound " + std::to_string(max_n));
  }
  const double p = params.p;
  const double n = static_cast<double>(params.n());
  const auto width = static_cast<std::size_t>(N + 1);  // index by v directly
  const auto death_prob = [&](std::int64_t v) {
    return (1.0 - p) / (1.0 - p * static_cast<double>(v - 1) / n);
  };

  // next[a] = F(a, v + 1) for a = 0..v+1.
  std::vector<std::vector<double>> next;
  std::vector<std::vector<double>> cur;
  for (std::int64_t v = N; v >= 1; --v) {
    cur.assign(static_cast<std::size_t>(v + 1), std::vector<double>(width, 0.0));
    cur[0][static_cast<std::size_t>(v)] = 1.0;
    if (v == N) {
      for (std::int64_t a = 1; a <= v; ++a) cur[static_cast<std::size_t>(a)][width - 1] = 1.0;
    } else {
      const double q = death_prob(v);
      for (std::int64_t a = 1; a <= v; ++a) {
        auto& out = cur[static_cast<std::size_t>(a)];
        const auto& down = cur[static_cast<std::size_t>(a - 1)];
        const auto& up = next[static_cast<std::size_t>(a + 1)];
        for (std::size_t w = static_cast<std::size_t>(v); w < width; ++w) {
          out[w] = q * down[w] + (1.0 - q) * up[w];
        }
      }
    }
    std::swap(cur, next);
  }
  PmfTable table;
  table.N = N;
  table.p = p;
  table.mass.assign(next[1].begin() + 1, next[1].end());
  return table;
}

/// P(V_inf <= threshold).
inline double exact_tail(const PmfTable& table, std::int64_t threshold) {
  if (threshold < 1 || threshold > table.N) {
    throw Error(ErrorCode::RangeError, "threshold must lie in [1, N]");
  }
  CompensatedSum s;
  for (std::int64_t v = 1; v <= threshold; ++v) s.add(table.at(v));
  return s.value();
}

inline double exact_tail(const SimParams& params, std::int64_t threshold,
                         std::int64_t max_n = kExactDefaultMaxN) {
  if (threshold < 1 || threshold > params.N) {
    throw Error(ErrorCode::RangeError, "threshold must lie in [1, N]");
  }
  return exact_tail(exact_pmf(params, max_n), threshold);
}

inline void write_csv(std::ostream& out, const PmfTable& table) {
  const auto old_precision = out.precision(17);
  out << "v,mass\n";
  for (std::int64_t v = 1; v <= table.N; ++v) out << v << ',' << table.at(v) << '\n';
  out.precision(old_precision);
}

}  // namespace frogsim
