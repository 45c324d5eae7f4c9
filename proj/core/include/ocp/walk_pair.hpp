#pragma once

// Two independent oriented simple random walks S, S^ on Z^d started at the
// origin; each step is e_i with probability 1/d. A meeting at time i
// (S_i = S^_i, i < N) is a stick if the walks also agree at i + 1 and a split
// otherwise. Stick times are tau_1 < tau_2 < ...; sigma_k counts the splits
// strictly between tau_{k-1} and tau_k (tau_0 = -1), and rho counts the
// splits after the last stick. Everything is truncated at the horizon N.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ocp/environment.hpp"
#include "ocp/stats.hpp"

namespace ocp {

struct MeetingCounts {
  std::uint64_t stick = 0;  // |A_n|
  std::uint64_t split = 0;  // |B_n|
  std::optional<std::int64_t> theta;
};

class WalkPairTrace {
 public:
  int d = 1;
  std::int64_t horizon = 0;
  /// Meeting times i in [0, N] with S_i = S^_i, increasing; always starts with 0.
  std::vector<std::int64_t> meetings;
  /// For each meeting i < N: whether S_{i+1} = S^_{i+1}.
  std::vector<bool> sticky;
  /// First j >= 1 with S_j = S^_j, if any within the horizon.
  std::optional<std::int64_t> theta;
  std::uint64_t stick_count = 0;  // |A_N|
  std::uint64_t split_count = 0;  // |B_N|
  std::vector<std::int64_t> taus;
  std::vector<std::uint64_t> sigmas;  // sigmas[k-1] = sigma_k
  std::uint64_t rho = 0;
  /// Step directions (1-based) of both walks when requested.
  std::optional<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> steps;

  /// Counts for the prefix of length n <= N.
  MeetingCounts counts_at(std::int64_t n) const;
  /// split_count == sum(sigmas) + rho and stick_count == taus.size().
  bool decomposition_holds() const noexcept;
  /// Both walks' positions at times 0..N; needs steps.
  std::pair<std::vector<Vertex>, std::vector<Vertex>> positions() const;
};

/// One trace; a pure function of (d, N, seed).
WalkPairTrace simulate_pair(int d, std::int64_t horizon, std::uint64_t seed, bool keep_steps = false);

/// Trace i uses seed_schedule(seed, "walk", i).
std::vector<WalkPairTrace> simulate_pairs(int d, std::int64_t horizon, std::size_t replicas, std::uint64_t seed,
                                          int threads = 1);

struct ThetaTailEstimate {
  int d = 1;
  std::int64_t horizon = 0;
  Estimate tail;       // P(2 <= theta <= N)
  double c_hat = 0.0;  // d^2 * tail.mean
  double c_hat_se = 0.0;
};

/// P(2 <= theta <= n) at each n in `horizons` from one set of traces run to
/// the largest horizon, so the profile is nondecreasing in n.
std::vector<ThetaTailEstimate> theta_tail_profile(std::span<const WalkPairTrace> traces,
                                                  std::span<const std::int64_t> horizons);

ThetaTailEstimate estimate_theta_tail(int d, std::int64_t horizon, std::size_t replicas, std::uint64_t seed,
                                      int threads = 1);

/// max over the rows of d^2 * P(2 <= theta <= N). The value is an empirical
/// stand-in for the collision constant and is only as good as the d-grid.
double empirical_c_hat(std::span<const ThetaTailEstimate> rows);

/// q = (lambda + 1) / (lambda p).
double stick_weight(double p, double lambda);

struct MomentPoint {
  std::int64_t horizon = 0;
  Estimate moment;
};

struct LemmaMoment {
  int d = 1;
  double p = 0.0;
  double lambda = 0.0;
  std::vector<MomentPoint> points;
  /// |last - previous| <= 2 combined SE.
  bool stabilized = false;
};

/// Sample mean of 2^{|B_N|} q^{|A_N|} at each horizon, from traces run to the
/// largest horizon. Throws DivergenceError for d = 1 (every step is a stick).
LemmaMoment lemma_moment(int d, double p, double lambda, std::span<const std::int64_t> horizons,
                         std::size_t replicas, std::uint64_t seed, int threads = 1);

/// Same, on caller-provided traces.
LemmaMoment lemma_moment(std::span<const WalkPairTrace> traces, double p, double lambda,
                         std::span<const std::int64_t> horizons);

struct MomentDecomposition {
  double q = 0.0;
  Estimate sigma_term;  // E[2^{sigma_1} 1{tau_1 < N}]
  Estimate rho_term;    // E[2^{rho_0} 1{no stick before N}]
  /// rho_term / (1 - q sigma_term); infinite when q sigma_term >= 1.
  double value = 0.0;
  double value_se = 0.0;
  bool finite = false;
};

/// The geometric-series form of the moment, with both factors estimated from
/// the traces.
MomentDecomposition moment_decomposition(std::span<const WalkPairTrace> traces, double p, double lambda);

/// 1 / (dp - 2 p C / d - 1), or nothing when the denominator is not positive.
std::optional<double> upper_bound_lambda(int d, double p, double c_hat);

}  // namespace ocp
