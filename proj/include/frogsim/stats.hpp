#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "frogsim/model.hpp"

namespace frogsim {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double half_width() const noexcept { return 0.5 * (hi - lo); }
};

/// Two-sided standard normal quantile for the given confidence level.
inline double normal_critical_value(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::DomainError, "confidence must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * confidence);
}

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double confidence = 0.95) {
  if (trials == 0 || successes > trials) {
    throw Error(ErrorCode::DomainError, "need 0 <= successes <= trials and trials >= 1");
  }
  const double z = normal_critical_value(confidence);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double center = (phat + 0.5 * z2n) / (1.0 + z2n);
  const double half =
      z / (1.0 + z2n) * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n));
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.lo = 0.0;
  if (successes == trials) ci.hi = 1.0;
  return ci;
}

/// Standard error of a proportion estimated from `trials` samples when the
/// true value is `prob`.
inline double binomial_sigma(double prob, std::uint64_t trials) noexcept {
  return std::sqrt(prob * (1.0 - prob) / static_cast<double>(trials));
}

/// Two-sample Kolmogorov-Smirnov statistic for integer-valued samples given
/// as histograms over the same support.
inline double ks_statistic(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  double na = 0.0;
  double nb = 0.0;
  for (const auto c : a) na += static_cast<double>(c);
  for (const auto c : b) nb += static_cast<double>(c);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::EmptyRun, "empty sample");
  double ca = 0.0;
  double cb = 0.0;
  double d = 0.0;
  const std::size_t len = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < len; ++i) {
    if (i < a.size()) ca += static_cast<double>(a[i]);
    if (i < b.size()) cb += static_cast<double>(b[i]);
    d = std::max(d, std::abs(ca / na - cb / nb));
  }
  return d;
}

/// Large-sample critical value of the two-sample KS statistic at level alpha.
/// Conservative for discrete distributions.
inline double ks_critical_value(std::uint64_t na, std::uint64_t nb, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double a = static_cast<double>(na);
  const double b = static_cast<double>(nb);
  return c * std::sqrt((a + b) / (a * b));
}

}  // namespace frogsim
