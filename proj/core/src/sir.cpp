#include "ocp/sir.hpp"

#include <cmath>

#include "ocp/errors.hpp"
#include "ocp/parallel.hpp"
#include "ocp/random.hpp"

namespace ocp {

InfectionTrialField::InfectionTrialField(QuenchedEnvironment env, double lambda, std::uint64_t trial_seed)
    : env_(std::move(env)), lambda_(lambda), seed_(trial_seed) {
  require(lambda > 0.0 && std::isfinite(lambda), "infection rate must be positive and finite");
}

double InfectionTrialField::recovery_clock(std::span<const std::int64_t> x) const noexcept {
  KeyedHash h(seed_, Domain::sir_recovery);
  h.add(x.size()).add_words(x);
  return to_exponential(h.digest(), 1.0);
}

double InfectionTrialField::attempt_clock(std::span<const std::int64_t> x, int axis) const noexcept {
  KeyedHash h(seed_, Domain::sir_attempt);
  h.add(x.size()).add(static_cast<std::uint64_t>(axis)).add_words(x);
  return to_exponential(h.digest(), lambda_);
}

bool InfectionTrialField::infects_axis(std::span<const std::int64_t> x, int axis) const noexcept {
  return env_.is_open(x, axis) && attempt_clock(x, axis) <= recovery_clock(x);
}

bool InfectionTrialField::infects(const Vertex& x, int direction) const {
  require(x.dim() == env_.dim(), "vertex dimension does not match d");
  require(direction >= 1 && direction <= env_.dim(), "direction outside [1, d]");
  return infects_axis(x.coords(), direction - 1);
}

double single_infection_probability(double lambda, double p) { return lambda * p / (1.0 + lambda); }

double pair_infection_probability(double lambda, double p) {
  return 2.0 * lambda * lambda * p * p / ((2.0 * lambda + 1.0) * (lambda + 1.0));
}

std::vector<OrientedPath> all_paths(int d, int n) {
  check_enumeration_budget(d, n);
  std::vector<OrientedPath> out;
  OrientedPath path{std::vector<int>(static_cast<std::size_t>(n), 1)};
  for (;;) {
    out.push_back(path);
    int i = n - 1;
    while (i >= 0 && path.steps[static_cast<std::size_t>(i)] == d) path.steps[static_cast<std::size_t>(i--)] = 1;
    if (i < 0) break;
    ++path.steps[static_cast<std::size_t>(i)];
  }
  return out;
}

PathOverlap path_overlap(const OrientedPath& a, const OrientedPath& b) {
  require(a.length() == b.length(), "paths must have equal length");
  // Both paths sit at level i after i steps, so they share x_i exactly when
  // their step multisets up to i agree; track the difference vector.
  std::map<int, int> diff;
  PathOverlap out;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (diff.empty()) {
      if (a.steps[i] == b.steps[i])
        ++out.shared_steps;
      else
        ++out.split_steps;
    }
    if (a.steps[i] != b.steps[i]) {
      if (++diff[a.steps[i]] == 0) diff.erase(a.steps[i]);
      if (--diff[b.steps[i]] == 0) diff.erase(b.steps[i]);
    }
  }
  return out;
}

double theoretical_pair_correlation(const ModelParams& params, const OrientedPath& a, const OrientedPath& b) {
  const double lambda = params.infection_rate();
  const PathOverlap o = path_overlap(a, b);
  const int n = a.length();
  const double q1 = single_infection_probability(lambda, params.p);
  const double q2 = pair_infection_probability(lambda, params.p);
  return std::pow(q1, 2 * n - o.shared_steps - 2 * o.split_steps) * std::pow(q2, o.split_steps);
}

double exact_second_moment(const ModelParams& params, int n) {
  const auto paths = all_paths(params.d, n);
  require(static_cast<double>(paths.size()) * static_cast<double>(paths.size()) <= 1e8,
          "pair enumeration too large");
  double sum = 0.0;
  for (const auto& a : paths)
    for (const auto& b : paths) sum += theoretical_pair_correlation(params, a, b);
  return sum;
}

namespace {

InfectionTrialField replica_field(const ModelParams& params, std::uint64_t seed, std::size_t i) {
  return InfectionTrialField(QuenchedEnvironment(ModelParams{params.d, params.p, std::nullopt},
                                                 seed_schedule(seed, "env", i)),
                             *params.lambda, seed_schedule(seed, "trial", i));
}

}  // namespace

SecondMomentResult second_moment_bound(const ModelParams& params, int n, std::size_t fields, std::uint64_t seed,
                                       int threads) {
  params.infection_rate();
  require(n >= 1, "path length must be >= 1");
  require(fields >= 2, "at least two trial fields are needed");
  check_enumeration_budget(params.d, n);
  std::vector<double> m(fields), m2(fields), alive(fields);
  parallel_for_index(fields, threads, [&](std::size_t i) {
    const auto count = static_cast<double>(count_infection_paths(replica_field(params, seed, i), params.d, n));
    m[i] = count;
    m2[i] = count * count;
    alive[i] = count > 0 ? 1.0 : 0.0;
  });
  SecondMomentResult out;
  out.n = n;
  out.first = estimate_from(m);
  out.second = estimate_from(m2);
  out.direct = estimate_from(alive);
  if (out.second.mean > 0.0) {
    const double a = out.first.mean, b = out.second.mean;
    out.bound = a * a / b;
    // Var of g(a, b) = a^2 / b via the sample covariance of (M, M^2).
    double cov = 0.0;
    for (std::size_t i = 0; i < fields; ++i) cov += (m[i] - a) * (m2[i] - b);
    cov /= static_cast<double>(fields - 1) * static_cast<double>(fields);
    const double ga = 2.0 * a / b, gb = -a * a / (b * b);
    const double var = ga * ga * out.first.se * out.first.se + gb * gb * out.second.se * out.second.se +
                       2.0 * ga * gb * cov;
    out.bound_se = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

std::vector<Estimate> infection_path_survival_curve(const ModelParams& params, int n, std::size_t fields,
                                                    std::uint64_t seed, int threads) {
  params.infection_rate();
  require(fields >= 1, "at least one trial field is needed");
  check_enumeration_budget(params.d, n);
  std::vector<int> deepest(fields);
  parallel_for_index(fields, threads, [&](std::size_t i) {
    const auto levels = infection_path_level_counts(replica_field(params, seed, i), params.d, n);
    int depth = 0;
    while (depth + 1 < static_cast<int>(levels.size()) && levels[static_cast<std::size_t>(depth + 1)] > 0) ++depth;
    deepest[i] = depth;
  });
  std::vector<Estimate> out;
  for (int k = 0; k <= n; ++k) {
    std::size_t alive = 0;
    for (int depth : deepest) alive += depth >= k ? 1 : 0;
    out.push_back(proportion(alive, fields));
  }
  return out;
}

Estimate mean_open_path_count(const ModelParams& params, int n, std::size_t seeds, std::uint64_t master_seed,
                              int threads) {
  params.validate();
  check_enumeration_budget(params.d, n);
  std::vector<double> counts(seeds);
  parallel_for_index(seeds, threads, [&](std::size_t i) {
    const QuenchedEnvironment env(ModelParams{params.d, params.p, std::nullopt}, seed_schedule(master_seed, "env", i));
    counts[i] = static_cast<double>(count_open_paths_to_origin(env, n));
  });
  return estimate_from(counts);
}

}  // namespace ocp
