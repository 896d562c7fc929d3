#pragma once

// Round-by-round re-scheduling of the frog model on the complete graph.
//
// One particle acts per round. Only the pair (A', V') is tracked: on K_{n+1}
// the outcome law depends on nothing but the number of vertices visited so
// far, so particle identities and positions are irrelevant.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frogsim/model.hpp"

namespace frogsim {

/// Threshold layout on [0,1) shared by every sampler in this header:
///   [0, 1-p)                 Death
///   [1-p, 1-p + band*p/n)    Revisit
///   [1-p + band*p/n, 1)      NewVertex
/// All coupled processes read the same uniform, which is what makes the
/// dominations hold path by path.
///
/// The comparison is carried out in the rescaled coordinate
/// w = (u - (1-p)) * n / p, where the Revisit band is [0, band). A band of n
/// or more covers every other vertex and leaves no room for NewVertex.
class BandSampler {
 public:
  BandSampler(double p, std::int64_t n) noexcept
      : death_(1.0 - p), scale_(p > 0.0 ? static_cast<double>(n) / p : 0.0), n_(n) {}

  double rescale(double u) const noexcept { return (u - death_) * scale_; }

  RoundOutcome sample(double band, double u) const noexcept {
    if (u < death_) return RoundOutcome::Death;
    if (band >= static_cast<double>(n_) || rescale(u) < band) return RoundOutcome::Revisit;
    return RoundOutcome::NewVertex;
  }

  RoundOutcome survive_or_die(double u) const noexcept {
    return u < death_ ? RoundOutcome::Death : RoundOutcome::NewVertex;
  }

  /// floor(w) clamped to n - 1; meaningful only when u >= 1-p. For an
  /// integral band b in [0, n], sample() yields NewVertex exactly when the
  /// particle survives and floor_rescaled(u) >= b.
  std::int64_t floor_rescaled(double u) const noexcept {
    return std::min(static_cast<std::int64_t>(rescale(u)), n_ - 1);
  }

  double death() const noexcept { return death_; }

 private:
  double death_;
  double scale_;
  std::int64_t n_;
};

/// Outcome of a round whose acting particle sees `v_prev` visited vertices.
inline RoundOutcome sample_round(std::int64_t v_prev, const SimParams& params,
                                 double u) noexcept {
  return BandSampler(params.p, params.n()).sample(static_cast<double>(v_prev - 1), u);
}

struct Trajectory {
  std::int64_t v_infinity = 1;
  std::uint64_t r_rounds = 0;
  std::int64_t peak_active = 1;
  SimParams params;
  std::uint64_t deaths = 0;
  std::uint64_t revisits = 0;
  std::uint64_t new_vertices = 0;
  std::vector<RoundOutcome> history;  // only with AuxOptions::record_history
};

struct AuxOptions {
  std::uint64_t round_cap = 1'000'000'000ULL;
  bool record_history = false;
};

/// Runs the original process to absorption (first round with A' = 0) and
/// returns V_inf = V'_R. Rounds after R would only involve bookkeeping
/// particles and cannot change V_inf, so they are not simulated.
inline Trajectory run_auxiliary(const SimParams& params, RngStream& stream,
                                const AuxOptions& options = {}) {
  const BandSampler sampler(params.p, params.n());
  Trajectory t;
  t.params = params;
  const double death = sampler.death();
  const std::uint64_t cap = options.round_cap;
  const bool record = options.record_history;
  std::int64_t active = 1;
  std::int64_t visited = 1;
  std::int64_t peak = 1;
  std::uint64_t round = 0;
  // Local copy so the generator state stays in registers.
  RngStream rng = stream;
  while (active > 0) {
    if (round >= cap) {
      throw Error(ErrorCode::RoundCapExceeded,
                  "auxiliary process exceeded " + std::to_string(cap) + " rounds");
    }
    ++round;
    const double u = rng.uniform();
    const std::int64_t survived = u >= death;
    const std::int64_t fresh = survived & (sampler.floor_rescaled(u) >= visited - 1);
    active += survived + fresh - 1;
    visited += fresh;
    peak = std::max(peak, active);
    if (record) t.history.push_back(static_cast<RoundOutcome>(survived + fresh));
  }
  stream = rng;
  // A' starts at 1, gains one per NewVertex and ends at 0, so every
  // activated particle died exactly once.
  t.new_vertices = static_cast<std::uint64_t>(visited - 1);
  t.deaths = static_cast<std::uint64_t>(visited);
  t.revisits = round - t.deaths - t.new_vertices;
  t.peak_active = peak;
  t.v_infinity = visited;
  t.r_rounds = round;
  return t;
}

// ---------------------------------------------------------------------------
// Coupled comparison processes.

/// Fixed Revisit bands used by the lower process X- (k_minus) and the
/// Y process (k_plus).
struct CouplingBands {
  double k_minus = 0.0;
  double k_plus = 0.0;
};

struct CoupledRound {
  std::uint64_t round = 0;
  double u = 0.0;
  RoundOutcome x = RoundOutcome::Death;
  RoundOutcome x_plus = RoundOutcome::Death;
  RoundOutcome x_minus = RoundOutcome::Death;
  RoundOutcome y = RoundOutcome::Death;
};

/// State at the end of a round. The `a*` members are potential counts
/// 1 + sum(X_j - 1) and are not frozen at absorption; they may go negative.
struct CoupledTracks {
  std::int64_t a = 1;
  std::int64_t a_plus = 1;
  std::int64_t a_minus = 1;
  std::int64_t a_y = 1;
  std::int64_t v = 1;       // V' of the actual process
  std::int64_t v_plus = 1;  // 1 + #{X+ = 2}
  std::int64_t y_sum = 0;
  std::int64_t y_new = 0;   // #{Y = 2}
};

struct CoupledSummary {
  std::uint64_t rounds_run = 0;
  std::optional<std::uint64_t> r;
  std::optional<std::uint64_t> r_plus;
  std::optional<std::uint64_t> r_minus;
  std::optional<std::int64_t> v_infinity;       // V'_R
  std::optional<std::int64_t> v_infinity_plus;  // V'+ at R+
  CoupledTracks final_tracks;
};

struct CoupledOptions {
  std::uint64_t max_rounds = 1'000'000;
  bool stop_when_absorbed = true;
};

inline void check_bands(const SimParams& params, const CouplingBands& bands) {
  constexpr double kTol = 1e-12;
  const double n = static_cast<double>(params.n());
  for (const double band : {bands.k_minus, bands.k_plus}) {
    if (band < 0.0 || params.p * band / n > params.p + kTol) {
      throw Error(ErrorCode::BandOverflow,
                  "revisit band " + std::to_string(band) + " exceeds n = " +
                      std::to_string(params.n()) + " at p = " + std::to_string(params.p));
    }
  }
}

/// Drives X, X+, X- and Y from one uniform per round. `on_round` is called
/// as on_round(const CoupledRound&, const CoupledTracks& before,
/// const CoupledTracks& after). Stops after max_rounds or, when requested,
/// once R, R+ and R- are all known.
template <class OnRound>
CoupledSummary run_coupled(const SimParams& params, RngStream& stream,
                           const CouplingBands& bands, const CoupledOptions& options,
                           OnRound&& on_round) {
  if (options.max_rounds < 1) {
    throw Error(ErrorCode::DomainError, "max_rounds must be >= 1");
  }
  check_bands(params, bands);
  const BandSampler sampler(params.p, params.n());
  CoupledSummary out;
  CoupledTracks tracks;
  for (std::uint64_t k = 1; k <= options.max_rounds; ++k) {
    const CoupledTracks before = tracks;
    CoupledRound round;
    round.round = k;
    round.u = stream.uniform();
    round.x = sampler.sample(static_cast<double>(tracks.v - 1), round.u);
    round.x_minus = sampler.sample(bands.k_minus, round.u);
    round.y = sampler.sample(bands.k_plus, round.u);
    round.x_plus = sampler.survive_or_die(round.u);

    tracks.a += code(round.x) - 1;
    tracks.a_plus += code(round.x_plus) - 1;
    tracks.a_minus += code(round.x_minus) - 1;
    tracks.a_y += code(round.y) - 1;
    tracks.y_sum += code(round.y);
    if (round.x == RoundOutcome::NewVertex) ++tracks.v;
    if (round.x_plus == RoundOutcome::NewVertex) ++tracks.v_plus;
    if (round.y == RoundOutcome::NewVertex) ++tracks.y_new;

    if (!out.r && tracks.a == 0) {
      out.r = k;
      out.v_infinity = tracks.v;
    }
    if (!out.r_plus && tracks.a_plus == 0) {
      out.r_plus = k;
      out.v_infinity_plus = tracks.v_plus;
    }
    if (!out.r_minus && tracks.a_minus == 0) out.r_minus = k;

    on_round(static_cast<const CoupledRound&>(round),
             static_cast<const CoupledTracks&>(before),
             static_cast<const CoupledTracks&>(tracks));
    out.rounds_run = k;
    if (options.stop_when_absorbed && out.r && out.r_plus && out.r_minus) break;
  }
  out.final_tracks = tracks;
  return out;
}

/// Full per-round record of a coupled run, for small inspections.
struct CoupledTrace {
  CoupledSummary summary;
  std::vector<CoupledRound> rounds;
  std::vector<CoupledTracks> tracks;
};

inline CoupledTrace record_coupled(const SimParams& params, RngStream& stream,
                                   const CouplingBands& bands,
                                   const CoupledOptions& options) {
  CoupledTrace trace;
  trace.summary = run_coupled(
      params, stream, bands, options,
      [&](const CoupledRound& r, const CoupledTracks&, const CoupledTracks& after) {
        trace.rounds.push_back(r);
        trace.tracks.push_back(after);
      });
  return trace;
}

/// Violation counters for the pathwise comparisons that must hold under the
/// shared-uniform coupling.
struct CouplingCheck {
  std::uint64_t replicas = 0;
  std::uint64_t rounds_checked = 0;
  std::uint64_t outcome_order = 0;   // code(X-) <= code(X) <= code(X+), k <= k-
  std::uint64_t track_order = 0;     // A'- <= A' (k <= k-), A' <= A'+ (always)
  std::uint64_t y_order = 0;         // code(Y) <= code(X) when V'_{k-1} - 1 <= k+
  std::uint64_t x_plus_range = 0;    // X+ never Revisit
  std::uint64_t absorption_order = 0;  // R+ <= k- => R <= k- => R- <= k-
  std::uint64_t coverage_order = 0;  // V_inf+ >= V_inf
  std::uint64_t unresolved = 0;      // R not reached within max_rounds

  std::uint64_t violations() const noexcept {
    return outcome_order + track_order + y_order + x_plus_range + absorption_order +
           coverage_order;
  }
  bool clean() const noexcept { return violations() == 0; }

  CouplingCheck& operator+=(const CouplingCheck& o) noexcept {
    replicas += o.replicas;
    rounds_checked += o.rounds_checked;
    outcome_order += o.outcome_order;
    track_order += o.track_order;
    y_order += o.y_order;
    x_plus_range += o.x_plus_range;
    absorption_order += o.absorption_order;
    coverage_order += o.coverage_order;
    unresolved += o.unresolved;
    return *this;
  }
};

/// One coupled replica, checked round by round.
inline CouplingCheck check_coupled_replica(const SimParams& params, RngStream& stream,
                                           const CouplingBands& bands,
                                           std::uint64_t max_rounds) {
  CouplingCheck check;
  check.replicas = 1;
  const auto summary = run_coupled(
      params, stream, bands, CoupledOptions{max_rounds, true},
      [&](const CoupledRound& r, const CoupledTracks& before, const CoupledTracks& after) {
        ++check.rounds_checked;
        const bool in_lower_regime = static_cast<double>(r.round) <= bands.k_minus;
        if (in_lower_regime &&
            !(code(r.x_minus) <= code(r.x) && code(r.x) <= code(r.x_plus))) {
          ++check.outcome_order;
        }
        if (code(r.x) > code(r.x_plus)) ++check.outcome_order;
        if (after.a > after.a_plus || (in_lower_regime && after.a_minus > after.a)) {
          ++check.track_order;
        }
        if (static_cast<double>(before.v - 1) <= bands.k_plus && code(r.y) > code(r.x)) {
          ++check.y_order;
        }
        if (r.x_plus == RoundOutcome::Revisit) ++check.x_plus_range;
      });
  const auto within = [&](const std::optional<std::uint64_t>& r) {
    return r && static_cast<double>(*r) <= bands.k_minus;
  };
  if ((within(summary.r_plus) && !within(summary.r)) ||
      (within(summary.r) && !within(summary.r_minus))) {
    ++check.absorption_order;
  }
  if (!summary.r) {
    ++check.unresolved;
  } else if (summary.r_plus && *summary.v_infinity_plus < *summary.v_infinity) {
    ++check.coverage_order;
  } else if (summary.r_plus && *summary.r_plus < *summary.r) {
    ++check.absorption_order;
  }
  return check;
}

}  // namespace frogsim
