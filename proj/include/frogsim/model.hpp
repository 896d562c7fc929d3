#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace frogsim {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ErrorCode {
  PInvalid,
  NInvalid,
  RoundCapExceeded,
  BandOverflow,
  BandInvalid,
  FeasibilityExceeded,
  NoConvergence,
  EmptyRun,
  SubcriticalP,
  DomainError,
  RangeError,
  ConfigInvalid,
  GraphInvalid,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PInvalid: return "PInvalid";
    case ErrorCode::NInvalid: return "NInvalid";
    case ErrorCode::RoundCapExceeded: return "RoundCapExceeded";
    case ErrorCode::BandOverflow: return "BandOverflow";
    case ErrorCode::BandInvalid: return "BandInvalid";
    case ErrorCode::FeasibilityExceeded: return "FeasibilityExceeded";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptyRun: return "EmptyRun";
    case ErrorCode::SubcriticalP: return "SubcriticalP";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::GraphInvalid: return "GraphInvalid";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception. `replica` is set
/// when the failure happened inside a Monte Carlo replica.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::uint64_t> replica = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        replica_(replica) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::uint64_t> replica() const noexcept { return replica_; }

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> replica_;
};

/// Survival probability and total vertex count of the complete graph.
/// Construct through validate_params().
struct SimParams {
  double p = 0.0;
  std::int64_t N = 2;
  std::uint64_t seed = 0;

  /// Denominator of the round transition law; the auxiliary process lives on
  /// K_{n+1}, so n = N - 1.
  std::int64_t n() const noexcept { return N - 1; }

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

inline SimParams validate_params(double p, std::int64_t N, std::uint64_t seed = 0) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw Error(ErrorCode::PInvalid, "survival probability must lie in [0, 1), got " +
                                         std::to_string(p));
  }
  if (N < 2) {
    throw Error(ErrorCode::NInvalid,
                "complete graph needs at least 2 vertices, got " + std::to_string(N));
  }
  return SimParams{p, N, seed};
}

/// Outcome of one round; the numeric value is the number of "descendants"
/// of the acting particle.
enum class RoundOutcome : std::uint8_t { Death = 0, Revisit = 1, NewVertex = 2 };

constexpr int code(RoundOutcome o) noexcept { return static_cast<int>(o); }

inline std::string_view to_string(RoundOutcome o) {
  switch (o) {
    case RoundOutcome::Death: return "Death";
    case RoundOutcome::Revisit: return "Revisit";
    case RoundOutcome::NewVertex: return "NewVertex";
  }
  return "?";
}

namespace detail {

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64_next(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Key for child stream `index` of `master`. Both words pass through the
/// splitmix64 finalizer; the index is pre-whitened with an odd constant so
/// that (s, i) and (i, s) do not collide.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return detail::mix64(master ^ detail::mix64(index ^ 0xD1B54A32D192ED03ULL));
}

/// xoshiro256** generator. The 256-bit state is filled from a splitmix64
/// sequence started at the seed, which never yields the all-zero state in
/// practice. Single owner: copy it if you need to replay, never share it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = detail::splitmix64_next(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }

  result_type next() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by multiply-shift; bias is below bound / 2^64.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t s_[4];
};

/// Independent, reproducible stream for replica `replica_index`.
inline RngStream substream(std::uint64_t master_seed, std::uint64_t replica_index) noexcept {
  return RngStream(derive_seed(master_seed, replica_index));
}

}  // namespace frogsim
