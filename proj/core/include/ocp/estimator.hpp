#pragma once

// Finite-scale estimates of the critical infection rate. Survival is measured
// at a horizon T in the box [-L, L]^d, and the pseudo-critical point is where
// it crosses a threshold epsilon. These are not infinite-volume limits; every
// result carries its (T, L, replicas, epsilon) labels.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocp/contact.hpp"
#include "ocp/environment.hpp"
#include "ocp/stats.hpp"

namespace ocp {

struct EstimatorConfig {
  double threshold = 0.02;  // epsilon
  double horizon = 30.0;    // T
  /// Second horizon for the T-sensitivity column; defaults to T / 2.
  std::optional<double> checkpoint;
  int box_radius = 40;
  std::size_t replicas = 2000;
  /// Runs that reach this many infected sites are counted as surviving.
  std::size_t population_cap = 5000;
  /// Starting vertices probed per environment in quenched mode (max survival).
  int quenched_probes = 4;
  std::uint64_t master_seed = 0;
  int threads = 1;

  void validate() const;
  double checkpoint_time() const { return checkpoint.value_or(horizon / 2.0); }
};

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double width() const noexcept { return high - low; }
  bool contains(double x) const noexcept { return low <= x && x <= high; }
  /// Open overlap: endpoints are evaluated rates already decided to one side
  /// of epsilon, so intervals that only touch do not overlap.
  bool overlaps(const Interval& o) const noexcept { return low < o.high && o.low < high; }
};

struct SurvivalPoint {
  double lambda = 0.0;
  Estimate survival;             // at T
  Estimate survival_checkpoint;  // at the checkpoint
  std::uint64_t boundary_hits = 0;
  std::size_t capped = 0;
};

struct SweepRecord {
  ModelParams params;  // lambda unset
  SurvivalMode mode;
  EstimatorConfig config;
  double lambda_ref = 0.0;
  std::vector<SurvivalPoint> points;
  std::vector<std::string> warnings;
};

/// Survival at each rate of a strictly increasing grid. All rates share marks
/// (arrow rate lambda_ref = last grid value), so the curve is monotone per
/// replica; a drop of more than 3 combined SE still produces a warning.
SweepRecord sweep(const ModelParams& params, std::span<const double> lambda_grid, SurvivalMode mode,
                  const EstimatorConfig& config);

/// Survival at the given rates against an explicit reference rate. Quenched
/// mode uses the dual process from several translated starting vertices and
/// keeps the maximum survival per rate.
std::vector<SurvivalPoint> evaluate_survival(const ModelParams& params, std::span<const double> lambdas,
                                             double lambda_ref, SurvivalMode mode, const EstimatorConfig& config);

/// Starting vertices used in quenched mode for `env_seed`; the first is the origin.
std::vector<Vertex> quenched_probe_offsets(int d, std::uint64_t env_seed, int count);

struct CriticalEstimate {
  ModelParams params;
  SurvivalMode mode;
  EstimatorConfig config;
  double lambda_hat = 0.0;
  /// Final bisection bracket; width <= tol.
  Interval bracket;
  /// Statistical interval: from the largest evaluated rate whose survival is
  /// below epsilon by 3 SE to the smallest one above it by 3 SE.
  Interval ci;
  /// Same construction at the checkpoint horizon, when the evaluations
  /// straddle epsilon there.
  std::optional<Interval> checkpoint_ci;
  double tol = 0.0;
  double lambda_ref = 0.0;
  std::vector<SurvivalPoint> evaluations;  // in evaluation order
};

/// Bisection for the threshold crossing in [lo, hi]. Throws BracketError with
/// the endpoint survivals unless survival(lo) < epsilon <= survival(hi).
CriticalEstimate bisect_lambda_c(const ModelParams& params, Interval initial, double tol, SurvivalMode mode,
                                 const EstimatorConfig& config);

struct BracketSearch {
  std::optional<Interval> bracket;
  /// Largest rate evaluated.
  double highest_tested = 0.0;
};

/// Widens [lo, hi] geometrically (hi doubles, lo halves) until it brackets the
/// crossing. Both endpoints are evaluated with arrow rate hi, exactly as
/// bisect_lambda_c will evaluate them. No bracket when hi would exceed hi_limit.
BracketSearch find_bracket(const ModelParams& params, Interval start, double hi_limit, SurvivalMode mode,
                                     const EstimatorConfig& config);

struct QuenchedRow {
  std::uint64_t env_seed = 0;
  std::optional<CriticalEstimate> estimate;
  std::string failure;
};

struct QuenchedAnnealedComparison {
  std::vector<QuenchedRow> quenched;
  CriticalEstimate annealed;
  /// max |lambda_hat_i - lambda_hat_j| over all completed estimates, annealed included.
  double max_deviation = 0.0;
  bool all_overlap = false;
};

QuenchedAnnealedComparison quenched_annealed_compare(const ModelParams& params,
                                                     std::span<const std::uint64_t> env_seeds, Interval start,
                                                     double tol, double hi_limit, const EstimatorConfig& config);

struct ScalingRow {
  int d = 1;
  double p = 0.0;
  double lower = 0.0;  // 1 / (dp)
  std::optional<double> upper;
  std::optional<CriticalEstimate> estimate;
  /// Set when no crossing was found up to this rate: lambda_c exceeds it.
  std::optional<double> exceeds;
  std::string failure;

  std::optional<double> scaled() const {
    if (!estimate) return std::nullopt;
    return d * p * estimate->lambda_hat;
  }
};

struct ScalingOptions {
  double tol = 0.02;
  /// Initial bracket in units of 1/(dp).
  double start_low = 0.5;
  double start_high = 2.0;
  /// Largest rate tried, in units of 1/(dp).
  double limit = 64.0;
  /// Collision constant for the upper-bound column; absent disables it.
  std::optional<double> c_hat;
};

std::vector<ScalingRow> scaling_table(double p, std::span<const int> d_list, const ScalingOptions& options,
                                      const EstimatorConfig& config);

}  // namespace ocp
