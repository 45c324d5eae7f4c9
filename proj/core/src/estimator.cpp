#include "ocp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "ocp/errors.hpp"
#include "ocp/random.hpp"
#include "ocp/walk_pair.hpp"

namespace ocp {

void EstimatorConfig::validate() const {
  require(threshold > 0.0 && threshold < 1.0, "survival threshold must be in (0, 1)");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon T must be positive and finite");
  require(checkpoint_time() >= 0.0 && checkpoint_time() <= horizon, "checkpoint must lie in [0, T]");
  require(box_radius >= 1, "box radius L must be >= 1");
  require(replicas >= 2, "replicas must be >= 2");
  require(quenched_probes >= 1, "at least one quenched probe is needed");
}

std::vector<Vertex> quenched_probe_offsets(int d, std::uint64_t env_seed, int count) {
  require(d >= 1 && count >= 1, "invalid probe request");
  std::vector<Vertex> out{Vertex::origin(d)};
  for (int k = 1; k < count; ++k) {
    std::vector<std::int64_t> x(static_cast<std::size_t>(d));
    for (int axis = 0; axis < d; ++axis) {
      const std::uint64_t h = KeyedHash(env_seed, Domain::probe)
                                  .add(static_cast<std::uint64_t>(k))
                                  .add(static_cast<std::uint64_t>(axis))
                                  .digest();
      x[static_cast<std::size_t>(axis)] = static_cast<std::int64_t>(to_index(h, 2001)) - 1000;
    }
    out.emplace_back(std::move(x));
  }
  return out;
}

namespace {

SimOptions sim_options(const EstimatorConfig& c, Direction direction, std::uint64_t seed) {
  SimOptions o;
  o.box_radius = c.box_radius;
  o.horizon = c.horizon;
  o.checkpoint = c.checkpoint_time();
  o.population_cap = c.population_cap;
  o.direction = direction;
  o.rng_seed = seed;
  o.threads = c.threads;
  return o;
}

SurvivalPoint to_point(double lambda, const SurvivalEstimate& e) {
  return {lambda, e.survival, e.survival_checkpoint, e.boundary_hits, e.capped};
}

// One call of survival_curve handles at most 64 coupled rates.
std::vector<SurvivalPoint> curve(const ModelParams& params, std::span<const double> lambdas, double lambda_ref,
                                 const SimOptions& opts, std::size_t replicas, const SurvivalMode& mode) {
  std::vector<SurvivalPoint> out;
  for (std::size_t start = 0; start < lambdas.size(); start += 64) {
    const auto chunk = lambdas.subspan(start, std::min<std::size_t>(64, lambdas.size() - start));
    const auto est = survival_curve(params, chunk, lambda_ref, opts, replicas, mode);
    for (std::size_t k = 0; k < chunk.size(); ++k) out.push_back(to_point(chunk[k], est[k]));
  }
  return out;
}

}  // namespace

std::vector<SurvivalPoint> evaluate_survival(const ModelParams& params, std::span<const double> lambdas,
                                             double lambda_ref, SurvivalMode mode, const EstimatorConfig& config) {
  config.validate();
  ModelParams geometry{params.d, params.p, std::nullopt};
  geometry.validate();
  require(!lambdas.empty(), "no rates to evaluate");
  require(std::is_sorted(lambdas.begin(), lambdas.end()), "rates must be nondecreasing");
  require(lambdas.front() > 0.0 && lambdas.back() <= lambda_ref, "rates must lie in (0, lambda_ref]");

  if (mode.kind == EnvironmentMode::annealed) {
    const SimOptions opts = sim_options(config, Direction::forward, seed_schedule(config.master_seed, "annealed", 0));
    return curve(geometry, lambdas, lambda_ref, opts, config.replicas, mode);
  }

  // Quenched: P^G(eta_t(x) = 1) from the all-infected start equals survival of
  // the dual process from x, and the critical value needs extinction at every
  // x, so keep the largest survival over the probed starting vertices.
  std::vector<SurvivalPoint> best;
  const auto offsets = quenched_probe_offsets(params.d, mode.env_seed, config.quenched_probes);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const SimOptions opts =
        sim_options(config, Direction::dual, seed_schedule(config.master_seed, "quenched-probe", k));
    const auto pts = curve(geometry, lambdas, lambda_ref, opts, config.replicas,
                           SurvivalMode::quenched(mode.env_seed, offsets[k]));
    if (best.empty()) {
      best = pts;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].survival.mean > best[i].survival.mean) best[i] = pts[i];
    }
  }
  return best;
}

SweepRecord sweep(const ModelParams& params, std::span<const double> lambda_grid, SurvivalMode mode,
                  const EstimatorConfig& config) {
  require(!lambda_grid.empty(), "empty rate grid");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    require(lambda_grid[i - 1] < lambda_grid[i], "rate grid must be strictly increasing");
  SweepRecord rec;
  rec.params = ModelParams{params.d, params.p, std::nullopt};
  rec.mode = mode;
  rec.config = config;
  rec.lambda_ref = lambda_grid.back();
  rec.points = evaluate_survival(rec.params, lambda_grid, rec.lambda_ref, mode, config);
  for (std::size_t i = 1; i < rec.points.size(); ++i) {
    const auto& a = rec.points[i - 1];
    const auto& b = rec.points[i];
    if (b.survival.mean < a.survival.mean - 3.0 * combined_se(a.survival, b.survival))
      rec.warnings.push_back(fmt::format("survival drops from {} at lambda={} to {} at lambda={}",
                                         a.survival.mean, a.lambda, b.survival.mean, b.lambda));
  }
  return rec;
}

BracketSearch find_bracket(const ModelParams& params, Interval start, double hi_limit, SurvivalMode mode,
                           const EstimatorConfig& config) {
  require(start.low > 0.0 && start.low < start.high, "bracket must satisfy 0 < lo < hi");
  const double eps = config.threshold;
  BracketSearch out;
  Interval b = start;
  for (;;) {
    if (b.high > hi_limit) return out;
    const double rates[] = {b.low, b.high};
    const auto pts = evaluate_survival(params, rates, b.high, mode, config);
    out.highest_tested = b.high;
    if (pts[1].survival.mean < eps) {
      b.high *= 2.0;
      continue;
    }
    if (pts[0].survival.mean >= eps) {
      require(b.low > 1e-9, "no subcritical rate found");
      b.low /= 2.0;
      continue;
    }
    out.bracket = b;
    return out;
  }
}

CriticalEstimate bisect_lambda_c(const ModelParams& params, Interval initial, double tol, SurvivalMode mode,
                                 const EstimatorConfig& config) {
  require(initial.low > 0.0 && initial.low < initial.high, "bracket must satisfy 0 < lo < hi");
  require(tol > 0.0, "tolerance must be positive");
  const double eps = config.threshold;
  CriticalEstimate out;
  out.params = ModelParams{params.d, params.p, std::nullopt};
  out.mode = mode;
  out.config = config;
  out.tol = tol;
  out.lambda_ref = initial.high;

  // Every evaluation shares the marks of arrow rate lambda_ref, so survival is
  // monotone in lambda per replica and bisection cannot oscillate.
  auto eval = [&](double lambda) {
    const double rate[] = {lambda};
    out.evaluations.push_back(evaluate_survival(out.params, rate, out.lambda_ref, mode, config).front());
    return out.evaluations.back().survival.mean;
  };
  const double s_lo = eval(initial.low);
  const double s_hi = eval(initial.high);
  if (!(s_lo < eps && s_hi >= eps))
    throw BracketError(fmt::format("survival does not cross {} on [{}, {}]: survival(lo)={}, survival(hi)={}", eps,
                                   initial.low, initial.high, s_lo, s_hi),
                       s_lo, s_hi);
  Interval b = initial;
  while (b.width() > tol) {
    const double mid = 0.5 * (b.low + b.high);
    if (eval(mid) >= eps)
      b.high = mid;
    else
      b.low = mid;
  }
  out.bracket = b;
  out.lambda_hat = 0.5 * (b.low + b.high);

  auto interval = [&](auto survival_of, Interval fallback) -> std::optional<Interval> {
    std::optional<double> low, high;
    for (const auto& e : out.evaluations) {
      const Estimate s = survival_of(e);
      if (s.mean + 3.0 * s.se < eps && (!low || e.lambda > *low)) low = e.lambda;
      if (s.mean - 3.0 * s.se >= eps && (!high || e.lambda < *high)) high = e.lambda;
    }
    if (!low && !high) return std::nullopt;
    return Interval{low.value_or(fallback.low), high.value_or(fallback.high)};
  };
  out.ci = interval([](const SurvivalPoint& e) { return e.survival; }, initial).value_or(initial);
  out.ci.low = std::min(out.ci.low, b.low);
  out.ci.high = std::max(out.ci.high, b.high);
  out.checkpoint_ci = interval([](const SurvivalPoint& e) { return e.survival_checkpoint; }, initial);
  return out;
}

QuenchedAnnealedComparison quenched_annealed_compare(const ModelParams& params,
                                                     std::span<const std::uint64_t> env_seeds, Interval start,
                                                     double tol, double hi_limit, const EstimatorConfig& config) {
  require(env_seeds.size() >= 5, "at least five environment seeds are needed");
  auto estimate = [&](SurvivalMode mode) {
    const BracketSearch search = find_bracket(params, start, hi_limit, mode, config);
    if (!search.bracket)
      throw BracketError(fmt::format("no threshold crossing up to lambda={}", search.highest_tested), 0.0, 0.0);
    return bisect_lambda_c(params, *search.bracket, tol, mode, config);
  };
  QuenchedAnnealedComparison out;
  out.annealed = estimate(SurvivalMode::annealed());
  std::vector<const CriticalEstimate*> done{&out.annealed};
  for (std::uint64_t seed : env_seeds) {
    QuenchedRow row;
    row.env_seed = seed;
    try {
      row.estimate = estimate(SurvivalMode::quenched(seed));
    } catch (const BracketError& e) {
      row.failure = e.what();
    }
    out.quenched.push_back(std::move(row));
  }
  bool complete = true;
  for (const auto& row : out.quenched) {
    if (row.estimate)
      done.push_back(&*row.estimate);
    else
      complete = false;
  }
  out.all_overlap = complete;
  for (std::size_t i = 0; i < done.size(); ++i) {
    for (std::size_t j = i + 1; j < done.size(); ++j) {
      out.max_deviation = std::max(out.max_deviation, std::abs(done[i]->lambda_hat - done[j]->lambda_hat));
      if (!done[i]->ci.overlaps(done[j]->ci)) out.all_overlap = false;
    }
  }
  return out;
}

std::vector<ScalingRow> scaling_table(double p, std::span<const int> d_list, const ScalingOptions& options,
                                      const EstimatorConfig& config) {
  require(!d_list.empty(), "empty dimension list");
  for (std::size_t i = 1; i < d_list.size(); ++i) require(d_list[i - 1] < d_list[i], "d_list must be increasing");
  require(options.start_low > 0.0 && options.start_low < options.start_high && options.start_high <= options.limit,
          "scaling bracket must satisfy 0 < start_low < start_high <= limit");
  std::vector<ScalingRow> rows;
  for (int d : d_list) {
    const ModelParams params{d, p, std::nullopt};
    params.validate();
    ScalingRow row;
    row.d = d;
    row.p = p;
    row.lower = 1.0 / (d * p);
    if (options.c_hat) row.upper = upper_bound_lambda(d, p, *options.c_hat);
    EstimatorConfig c = config;
    c.master_seed = seed_schedule(config.master_seed, "scaling", static_cast<std::uint64_t>(d));
    try {
      const BracketSearch search =
          find_bracket(params, Interval{options.start_low * row.lower, options.start_high * row.lower},
                       options.limit * row.lower, SurvivalMode::annealed(), c);
      if (search.bracket) {
        row.estimate = bisect_lambda_c(params, *search.bracket, options.tol, SurvivalMode::annealed(), c);
      } else {
        row.exceeds = search.highest_tested;
        row.failure = fmt::format("no threshold crossing up to lambda={}", search.highest_tested);
      }
    } catch (const BracketError& e) {
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ocp
