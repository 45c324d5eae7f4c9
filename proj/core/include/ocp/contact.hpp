#pragma once

// Event-driven simulation of the contact process on the open subgraph G(omega)
// of oriented percolation, truncated to the box [-L, L]^d with an absorbing
// boundary. Infected sites recover at rate 1; a healthy site x is infected at
// rate lambda times the number of infected y with y -> x open (forward) or
// x -> y open (dual).
//
// All randomness comes from a HarrisMarks instance keyed by the run seed, so a
// run is a deterministic function of (environment, seed, options), and runs at
// several infection rates can share one set of marks.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ocp/environment.hpp"
#include "ocp/stats.hpp"

namespace ocp {

enum class Direction { forward, dual };

struct SimOptions {
  int box_radius = 40;
  double horizon = 30.0;
  Direction direction = Direction::forward;
  std::uint64_t rng_seed = 0;
  /// Stop tracking a process once it holds this many infected sites and count
  /// it as alive at the horizon. 0 disables the cap.
  std::size_t population_cap = 0;
  /// Secondary time at which aliveness is also recorded (T-sensitivity).
  std::optional<double> checkpoint;
  /// Vertex whose state changes are recorded; defaults to the origin.
  std::optional<Vertex> probe;
  /// Replica-level worker count for estimators (0 = all cores).
  int threads = 1;

  void validate(int d) const;
};

struct ContactConfiguration {
  std::vector<Vertex> infected;  // sorted, no duplicates
  double time = 0.0;

  bool contains(const Vertex& v) const;
  std::size_t size() const noexcept { return infected.size(); }
};

struct RunResult {
  ContactConfiguration final;
  bool alive_at_horizon = false;
  std::optional<double> extinction_time;
  std::vector<std::pair<double, bool>> probe_trace;
  std::uint64_t boundary_hits = 0;
  /// Alive at SimOptions::checkpoint (equals alive_at_horizon when unset).
  bool alive_at_checkpoint = false;
  /// The population cap was reached; `final` is the configuration at that moment.
  bool capped = false;
  std::uint64_t events = 0;
};

/// Single quenched run from the infected set `initial`.
RunResult run_quenched(const QuenchedEnvironment& env, double lambda, std::span<const Vertex> initial,
                       const SimOptions& opts);

/// Basic coupling of two rates through shared marks. Throws ContractViolation
/// when lambda_low > lambda_high and std::logic_error if pathwise inclusion
/// ever fails (it cannot, by construction).
std::pair<RunResult, RunResult> run_coupled_pair(const QuenchedEnvironment& env, double lambda_low,
                                                 double lambda_high, std::span<const Vertex> initial,
                                                 const SimOptions& opts);

/// Coupled runs at nondecreasing rates `lambdas` (at most 64) using arrow marks
/// of rate `lambda_ref` >= max(lambdas). Results for a given rate depend only on
/// (lambda, lambda_ref, seed), never on the other rates in the call.
std::vector<RunResult> run_coupled(const QuenchedEnvironment& env, std::span<const double> lambdas,
                                   double lambda_ref, std::span<const Vertex> initial, const SimOptions& opts);

/// Box sites y with y <= probe coordinatewise (forward) or y >= probe (dual):
/// the all-infected start restricted to the sites that can affect the probe.
std::vector<Vertex> sites_influencing(const Vertex& probe, int d, int box_radius, Direction direction);

/// Annealed P(eta_t(probe) = 1) from the all-infected box, fresh environment and
/// process seed per replica.
Estimate annealed_occupation(const ModelParams& params, double t, const Vertex& probe, std::size_t replicas,
                             const SimOptions& opts);

enum class EnvironmentMode { annealed, quenched };

struct SurvivalMode {
  EnvironmentMode kind = EnvironmentMode::annealed;
  std::uint64_t env_seed = 0;
  /// Quenched only: run on the environment translated by this vertex, i.e.
  /// start the process at `origin_offset` of the seeded environment.
  std::optional<Vertex> origin_offset;

  static SurvivalMode annealed() { return {}; }
  static SurvivalMode quenched(std::uint64_t seed, std::optional<Vertex> offset = std::nullopt) {
    return {EnvironmentMode::quenched, seed, std::move(offset)};
  }
};

struct SurvivalEstimate {
  Estimate survival;             // alive at the horizon
  Estimate survival_checkpoint;  // alive at the checkpoint
  std::uint64_t boundary_hits = 0;
  std::size_t capped = 0;
};

/// Fraction of replicas started from {0} that are alive at opts.horizon.
SurvivalEstimate survival_probability(const ModelParams& params, const SimOptions& opts, std::size_t replicas,
                                      SurvivalMode mode);

/// Coupled survival estimates at several rates; replica i uses the same marks
/// and environment at every rate, so each replica's survival indicator is
/// nondecreasing in lambda.
std::vector<SurvivalEstimate> survival_curve(const ModelParams& params, std::span<const double> lambdas,
                                             double lambda_ref, const SimOptions& opts, std::size_t replicas,
                                             SurvivalMode mode);

struct DualityCheck {
  Estimate forward;  // P(eta_t(0) = 1), all infected at time 0
  Estimate dual;     // P(eta_t^{0} nonempty)
  double combined_se = 0.0;
};

/// Both sides of the annealed self-duality identity at time t. When `env_seed`
/// is given, both sides use that single environment (quenched; the identity
/// need not hold there).
DualityCheck check_self_duality(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts,
                                std::optional<std::uint64_t> env_seed = std::nullopt);

}  // namespace ocp
