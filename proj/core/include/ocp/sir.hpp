#pragma once

// Static infection-trial percolation used for the lower bound on survival.
// Each vertex x draws Y_x ~ Exp(1) and each (x, i) draws U_{x,i} ~ Exp(lambda);
// x infects x + e_i ("x => x + e_i") iff that edge is open and U_{x,i} <= Y_x.
// M_n is the set of length-n oriented paths from the origin whose every step is
// an infection; C_n != {} iff |M_n| > 0.

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ocp/environment.hpp"
#include "ocp/stats.hpp"

namespace ocp {

class InfectionTrialField {
 public:
  InfectionTrialField(QuenchedEnvironment env, double lambda, std::uint64_t trial_seed);

  const QuenchedEnvironment& environment() const noexcept { return env_; }
  int dim() const noexcept { return env_.dim(); }
  double lambda() const noexcept { return lambda_; }

  /// Y_x.
  double recovery_clock(std::span<const std::int64_t> x) const noexcept;
  /// U_{x,axis}, axis 0-based.
  double attempt_clock(std::span<const std::int64_t> x, int axis) const noexcept;

  /// x => x + e_direction, direction in [1, d].
  bool infects(const Vertex& x, int direction) const;
  /// Unchecked form with a 0-based axis.
  bool infects_axis(std::span<const std::int64_t> x, int axis) const noexcept;

 private:
  QuenchedEnvironment env_;
  double lambda_;
  std::uint64_t seed_;
};

template <class S>
concept InfectionSource = requires(const S& s, std::span<const std::int64_t> x, int axis) {
  { s.infects_axis(x, axis) } -> std::convertible_to<bool>;
};

/// |M_k| for k = 0..n, computed level by level: the number of infection paths
/// reaching each vertex at level k+1 is the sum over infecting predecessors.
/// Subject to the d^n enumeration budget so |M_n|^2 stays exact in a double.
template <InfectionSource S>
std::vector<std::uint64_t> infection_path_level_counts(const S& source, int d, int n) {
  check_enumeration_budget(d, n);
  std::vector<std::uint64_t> totals{1};
  std::map<std::vector<std::int64_t>, std::uint64_t> level{{std::vector<std::int64_t>(static_cast<std::size_t>(d), 0), 1}};
  for (int k = 0; k < n; ++k) {
    std::map<std::vector<std::int64_t>, std::uint64_t> next;
    for (const auto& [x, paths] : level) {
      for (int axis = 0; axis < d; ++axis) {
        if (!source.infects_axis(x, axis)) continue;
        std::vector<std::int64_t> y = x;
        ++y[static_cast<std::size_t>(axis)];
        next[std::move(y)] += paths;
      }
    }
    std::uint64_t total = 0;
    for (const auto& entry : next) total += entry.second;
    totals.push_back(total);
    level = std::move(next);
  }
  return totals;
}

/// |M_n|.
template <InfectionSource S>
std::uint64_t count_infection_paths(const S& source, int d, int n) {
  return infection_path_level_counts(source, d, n).back();
}

/// P(x => x + e_i) = lambda p / (1 + lambda).
double single_infection_probability(double lambda, double p);
/// P(x => x + e_i, x => x + e_j), i != j: 2 lambda^2 p^2 / ((2 lambda + 1)(lambda + 1)).
double pair_infection_probability(double lambda, double p);

/// Oriented path from the origin, steps are directions in [1, d].
struct OrientedPath {
  std::vector<int> steps;

  int length() const noexcept { return static_cast<int>(steps.size()); }
};

/// All d^n paths of length n in lexicographic order of their steps.
std::vector<OrientedPath> all_paths(int d, int n);

struct PathOverlap {
  int shared_steps = 0;  // same vertex, same next step
  int split_steps = 0;   // same vertex, different next steps
};

PathOverlap path_overlap(const OrientedPath& a, const OrientedPath& b);

/// P(both paths are fully infecting) =
/// q1^{2n - |A| - 2|B|} q2^{|B|} with q1, q2 the single and pair probabilities.
double theoretical_pair_correlation(const ModelParams& params, const OrientedPath& a, const OrientedPath& b);

/// Exact E|M_n|^2 as the sum of theoretical_pair_correlation over T_n x T_n.
double exact_second_moment(const ModelParams& params, int n);

struct SecondMomentResult {
  int n = 0;
  Estimate first;        // E|M_n|
  Estimate second;       // E|M_n|^2
  Estimate direct;       // P(|M_n| > 0)
  double bound = 0.0;    // (E|M_n|)^2 / E|M_n|^2
  double bound_se = 0.0; // delta method
};

/// Monte Carlo over `fields` independent trial fields (fresh environment each).
SecondMomentResult second_moment_bound(const ModelParams& params, int n, std::size_t fields, std::uint64_t seed,
                                       int threads = 1);

/// P(C_k != {}) for k = 0..n from the same fields; nonincreasing in k.
std::vector<Estimate> infection_path_survival_curve(const ModelParams& params, int n, std::size_t fields,
                                                    std::uint64_t seed, int threads = 1);

/// Annealed mean of the open-path count l_n over `seeds` environments.
Estimate mean_open_path_count(const ModelParams& params, int n, std::size_t seeds, std::uint64_t master_seed,
                              int threads = 1);

}  // namespace ocp
