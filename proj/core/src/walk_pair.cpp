#include "ocp/walk_pair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ocp/errors.hpp"
#include "ocp/parallel.hpp"
#include "ocp/random.hpp"

namespace ocp {

MeetingCounts WalkPairTrace::counts_at(std::int64_t n) const {
  require(n >= 0 && n <= horizon, "prefix length outside [0, N]");
  MeetingCounts out;
  for (std::size_t k = 0; k < meetings.size() && meetings[k] <= n; ++k) {
    const std::int64_t i = meetings[k];
    if (i >= 1 && !out.theta) out.theta = i;
    if (i < n) {
      if (sticky[k])
        ++out.stick;
      else
        ++out.split;
    }
  }
  return out;
}

bool WalkPairTrace::decomposition_holds() const noexcept {
  const std::uint64_t sigma_sum = std::accumulate(sigmas.begin(), sigmas.end(), std::uint64_t{0});
  return split_count == sigma_sum + rho && stick_count == taus.size() && sigmas.size() == taus.size();
}

std::pair<std::vector<Vertex>, std::vector<Vertex>> WalkPairTrace::positions() const {
  require(steps.has_value(), "trace was simulated without keep_steps");
  std::pair<std::vector<Vertex>, std::vector<Vertex>> out;
  Vertex s = Vertex::origin(d), t = Vertex::origin(d);
  out.first.push_back(s);
  out.second.push_back(t);
  for (std::size_t j = 0; j < steps->first.size(); ++j) {
    ++s[steps->first[j] - 1u];
    ++t[steps->second[j] - 1u];
    out.first.push_back(s);
    out.second.push_back(t);
  }
  return out;
}

WalkPairTrace simulate_pair(int d, std::int64_t horizon, std::uint64_t seed, bool keep_steps) {
  require(d >= 1 && d <= 255, "d must be in [1, 255]");
  require(horizon >= 1, "horizon must be >= 1");
  WalkPairTrace tr;
  tr.d = d;
  tr.horizon = horizon;
  if (keep_steps) tr.steps.emplace();

  // The walks agree iff their difference vector is zero; track how many of
  // its components are nonzero.
  std::vector<std::int64_t> diff(static_cast<std::size_t>(d), 0);
  int nonzero = 0;
  auto bump = [&](int axis, std::int64_t delta) {
    std::int64_t& v = diff[static_cast<std::size_t>(axis)];
    if (v == 0) ++nonzero;
    v += delta;
    if (v == 0) --nonzero;
  };
  SplitMix64 stream(KeyedHash(seed, Domain::walk).add(static_cast<std::uint64_t>(d)).digest());
  tr.meetings.push_back(0);
  bool met_before = true;
  for (std::int64_t j = 1; j <= horizon; ++j) {
    int a = 0, b = 0;
    if (d > 1) {
      a = static_cast<int>(to_index(stream(), static_cast<std::uint32_t>(d)));
      b = static_cast<int>(to_index(stream(), static_cast<std::uint32_t>(d)));
    }
    if (keep_steps) {
      tr.steps->first.push_back(static_cast<std::uint8_t>(a + 1));
      tr.steps->second.push_back(static_cast<std::uint8_t>(b + 1));
    }
    if (a != b) {
      bump(a, 1);
      bump(b, -1);
    }
    const bool met = nonzero == 0;
    if (met_before) tr.sticky.push_back(met);
    if (met) {
      tr.meetings.push_back(j);
      if (!tr.theta) tr.theta = j;
    }
    met_before = met;
  }

  std::uint64_t splits_since = 0;
  for (std::size_t k = 0; k < tr.sticky.size(); ++k) {
    if (tr.sticky[k]) {
      tr.taus.push_back(tr.meetings[k]);
      tr.sigmas.push_back(splits_since);
      splits_since = 0;
      ++tr.stick_count;
    } else {
      ++splits_since;
      ++tr.split_count;
    }
  }
  tr.rho = splits_since;
  return tr;
}

std::vector<WalkPairTrace> simulate_pairs(int d, std::int64_t horizon, std::size_t replicas, std::uint64_t seed,
                                          int threads) {
  std::vector<WalkPairTrace> out(replicas);
  parallel_for_index(replicas, threads,
                     [&](std::size_t i) { out[i] = simulate_pair(d, horizon, seed_schedule(seed, "walk", i)); });
  return out;
}

std::vector<ThetaTailEstimate> theta_tail_profile(std::span<const WalkPairTrace> traces,
                                                  std::span<const std::int64_t> horizons) {
  require(!traces.empty(), "no traces");
  const int d = traces.front().d;
  std::vector<ThetaTailEstimate> out;
  for (std::int64_t n : horizons) {
    std::size_t hits = 0;
    for (const auto& tr : traces) {
      require(tr.d == d, "traces of mixed dimension");
      require(n <= tr.horizon, "profile horizon beyond the simulated horizon");
      hits += tr.theta && *tr.theta >= 2 && *tr.theta <= n ? 1 : 0;
    }
    ThetaTailEstimate row;
    row.d = d;
    row.horizon = n;
    row.tail = proportion(hits, traces.size());
    row.c_hat = static_cast<double>(d) * d * row.tail.mean;
    row.c_hat_se = static_cast<double>(d) * d * row.tail.se;
    out.push_back(row);
  }
  return out;
}

ThetaTailEstimate estimate_theta_tail(int d, std::int64_t horizon, std::size_t replicas, std::uint64_t seed,
                                      int threads) {
  require(replicas >= 1, "replicas must be >= 1");
  const auto traces = simulate_pairs(d, horizon, replicas, seed, threads);
  const std::int64_t h[] = {horizon};
  return theta_tail_profile(traces, h).front();
}

double empirical_c_hat(std::span<const ThetaTailEstimate> rows) {
  double best = 0.0;
  for (const auto& r : rows) best = std::max(best, r.c_hat);
  return best;
}

double stick_weight(double p, double lambda) {
  require(p > 0.0 && p <= 1.0, "p must be in (0, 1]");
  require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive and finite");
  return (lambda + 1.0) / (lambda * p);
}

LemmaMoment lemma_moment(std::span<const WalkPairTrace> traces, double p, double lambda,
                         std::span<const std::int64_t> horizons) {
  require(!traces.empty(), "no traces");
  require(!horizons.empty(), "no horizons");
  const int d = traces.front().d;
  if (d == 1) throw DivergenceError("r_1 = infinity almost surely: every meeting in d = 1 is a stick");
  const double log_q = std::log(stick_weight(p, lambda));
  LemmaMoment out{d, p, lambda, {}, false};
  std::vector<double> values(traces.size());
  for (std::int64_t n : horizons) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const MeetingCounts c = traces[i].counts_at(n);
      values[i] = std::exp(static_cast<double>(c.split) * std::log(2.0) + static_cast<double>(c.stick) * log_q);
    }
    out.points.push_back({n, estimate_from(values)});
  }
  if (out.points.size() >= 2) {
    const auto& a = out.points[out.points.size() - 2].moment;
    const auto& b = out.points.back().moment;
    out.stabilized = std::isfinite(b.mean) && std::abs(b.mean - a.mean) <= 2.0 * combined_se(a, b);
  }
  return out;
}

LemmaMoment lemma_moment(int d, double p, double lambda, std::span<const std::int64_t> horizons,
                         std::size_t replicas, std::uint64_t seed, int threads) {
  if (d == 1) throw DivergenceError("r_1 = infinity almost surely: every meeting in d = 1 is a stick");
  require(!horizons.empty(), "no horizons");
  require(replicas >= 2, "replicas must be >= 2");
  stick_weight(p, lambda);
  const std::int64_t longest = *std::max_element(horizons.begin(), horizons.end());
  const auto traces = simulate_pairs(d, longest, replicas, seed, threads);
  return lemma_moment(traces, p, lambda, horizons);
}

MomentDecomposition moment_decomposition(std::span<const WalkPairTrace> traces, double p, double lambda) {
  require(traces.size() >= 2, "need at least two traces");
  MomentDecomposition out;
  out.q = stick_weight(p, lambda);
  std::vector<double> sigma_part(traces.size()), rho_part(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& tr = traces[i];
    sigma_part[i] = tr.taus.empty() ? 0.0 : std::ldexp(1.0, static_cast<int>(tr.sigmas.front()));
    rho_part[i] = tr.taus.empty() ? std::ldexp(1.0, static_cast<int>(tr.rho)) : 0.0;
  }
  out.sigma_term = estimate_from(sigma_part);
  out.rho_term = estimate_from(rho_part);
  const double a = out.sigma_term.mean, b = out.rho_term.mean;
  const double denom = 1.0 - out.q * a;
  out.finite = denom > 0.0;
  if (!out.finite) {
    out.value = std::numeric_limits<double>::infinity();
    out.value_se = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = b / denom;
  // Each trace contributes to exactly one of the two parts, so the per-trace
  // covariance is -a b.
  const double n = static_cast<double>(traces.size());
  const double ga = out.q * b / (denom * denom), gb = 1.0 / denom;
  const double var = ga * ga * out.sigma_term.se * out.sigma_term.se + gb * gb * out.rho_term.se * out.rho_term.se +
                     2.0 * ga * gb * (-a * b / n);
  out.value_se = std::sqrt(std::max(var, 0.0));
  return out;
}

std::optional<double> upper_bound_lambda(int d, double p, double c_hat) {
  require(d >= 1, "d must be >= 1");
  require(p > 0.0 && p <= 1.0, "p must be in (0, 1]");
  require(c_hat >= 0.0, "C_hat must be nonnegative");
  const double denom = d * p - 2.0 * p * c_hat / d - 1.0;
  if (!(denom > 0.0)) return std::nullopt;
  return 1.0 / denom;
}

}  // namespace ocp
