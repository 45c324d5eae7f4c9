#include "ocp/path_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include <absl/container/flat_hash_map.h>

#include "box_index.hpp"
#include "ocp/errors.hpp"
#include "ocp/graphical.hpp"
#include "ocp/parallel.hpp"
#include "ocp/random.hpp"

namespace ocp {

std::uint64_t PathProcessConfiguration::at(const Vertex& v) const {
  auto it = std::lower_bound(values.begin(), values.end(), v,
                             [](const auto& entry, const Vertex& key) { return entry.first < key; });
  return it != values.end() && it->first == v ? it->second : 0;
}

ContactConfiguration coupled_eta_view(const PathProcessConfiguration& zeta) {
  ContactConfiguration eta;
  eta.time = zeta.time;
  for (const auto& [v, value] : zeta.values)
    if (value >= 1) eta.infected.push_back(v);
  std::sort(eta.infected.begin(), eta.infected.end());
  return eta;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxDenseSites = 4'000'000;

// Dense event-driven simulation of zeta on a finite site set. Clock marks are
// keyed exactly like the contact engine's forward arrows (tail site, axis), so
// the two processes can be driven by one seed.
class ZetaSimulator {
 public:
  ZetaSimulator(const QuenchedEnvironment& env, double lambda, const detail::BoxIndex& box,
                std::vector<std::uint64_t> sites, std::uint64_t seed, double horizon, bool track_eta)
      : box_(box), marks_(seed, lambda), horizon_(horizon), track_eta_(track_eta), sites_(std::move(sites)) {
    require(sites_.size() <= kMaxDenseSites, "path process site set too large");
    const int d = env.dim();
    index_.reserve(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) index_[sites_[i]] = static_cast<std::uint32_t>(i);
    std::int64_t x[kMaxMaskDim];
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      clocks_.push_back({sites_[i], -1, 0, static_cast<std::uint32_t>(i)});
      box_.unpack(sites_[i], x);
      const std::uint32_t in = env.in_mask(std::span<const std::int64_t>(x, static_cast<std::size_t>(d)));
      for (int axis = 0; axis < d; ++axis) {
        if (!(in >> axis & 1U) || box_.coord(sites_[i], axis) <= -box_.radius()) continue;
        const std::uint64_t tail = sites_[i] - box_.stride(axis);
        auto it = index_.find(tail);
        if (it == index_.end()) continue;
        clocks_.push_back({tail, axis, it->second, static_cast<std::uint32_t>(i)});
      }
    }
    zeta_.assign(sites_.size(), 1);
    if (track_eta_) eta_.assign(sites_.size(), 1);
  }

  std::uint64_t run() {
    std::vector<std::pair<double, std::uint32_t>> initial;
    initial.reserve(clocks_.size());
    for (std::size_t c = 0; c < clocks_.size(); ++c) {
      const double t = next_time(clocks_[c], 0.0);
      if (t < kInf) initial.emplace_back(t, static_cast<std::uint32_t>(c));
    }
    queue_ = Queue(Later{}, std::move(initial));
    std::uint64_t events = 0;
    while (!queue_.empty()) {
      const auto [t, c] = queue_.top();
      queue_.pop();
      ++events;
      const Clock& clock = clocks_[c];
      if (clock.axis < 0) {
        zeta_[clock.target] = 0;
        if (track_eta_) eta_[clock.target] = 0;
      } else {
        const std::uint64_t add = zeta_[clock.source];
        std::uint64_t& v = zeta_[clock.target];
        if (v > std::numeric_limits<std::uint64_t>::max() - add) {
          v = std::numeric_limits<std::uint64_t>::max();
          overflow_ = true;
        } else {
          v += add;
        }
        if (track_eta_) eta_[clock.target] = eta_[clock.target] | eta_[clock.source];
      }
      if (track_eta_ && (zeta_[clock.target] >= 1) != (eta_[clock.target] != 0))
        throw std::logic_error("zeta support and coupled contact process disagree");
      const double next = next_time(clock, t);
      if (next < kInf) queue_.emplace(next, c);
    }
    return events;
  }

  std::uint64_t value_at(std::uint64_t key) const { return zeta_[index_.at(key)]; }
  bool overflow() const noexcept { return overflow_; }

  PathProcessConfiguration zeta_configuration() const {
    PathProcessConfiguration cfg;
    cfg.time = horizon_;
    cfg.overflow = overflow_;
    for (std::size_t i = 0; i < sites_.size(); ++i) cfg.values.emplace_back(box_.vertex(sites_[i]), zeta_[i]);
    std::sort(cfg.values.begin(), cfg.values.end());
    return cfg;
  }

  ContactConfiguration eta_configuration() const {
    ContactConfiguration cfg;
    cfg.time = horizon_;
    for (std::size_t i = 0; i < sites_.size(); ++i)
      if (eta_[i]) cfg.infected.push_back(box_.vertex(sites_[i]));
    std::sort(cfg.infected.begin(), cfg.infected.end());
    return cfg;
  }

 private:
  struct Clock {
    std::uint64_t mark_site;
    int axis;  // -1: recovery of target
    std::uint32_t source;
    std::uint32_t target;
  };
  struct Later {
    bool operator()(const std::pair<double, std::uint32_t>& a, const std::pair<double, std::uint32_t>& b) const {
      return a > b;
    }
  };
  using Queue = std::priority_queue<std::pair<double, std::uint32_t>, std::vector<std::pair<double, std::uint32_t>>, Later>;

  double next_time(const Clock& c, double after) const {
    return c.axis < 0 ? marks_.next_recovery(c.mark_site, after, horizon_)
                      : marks_.next_arrow(c.mark_site, c.axis, after, horizon_).time;
  }

  const detail::BoxIndex& box_;
  HarrisMarks marks_;
  double horizon_;
  bool track_eta_;
  bool overflow_ = false;
  std::vector<std::uint64_t> sites_;
  absl::flat_hash_map<std::uint64_t, std::uint32_t> index_;
  std::vector<Clock> clocks_;
  std::vector<std::uint64_t> zeta_;
  std::vector<std::uint8_t> eta_;
  Queue queue_;
};

std::vector<std::uint64_t> box_sites(const detail::BoxIndex& box) {
  std::uint64_t total = 1;
  for (int i = 0; i < box.dim(); ++i) {
    total *= 2 * static_cast<std::uint64_t>(box.radius()) + 1;
    require(total <= kMaxDenseSites, "box too large for the dense path-process simulation");
  }
  std::vector<std::uint64_t> keys(total);
  for (std::uint64_t k = 0; k < total; ++k) keys[k] = k;
  return keys;
}

// {-v : v >= 0, |v|_1 <= depth}
std::vector<std::uint64_t> backward_cone(const detail::BoxIndex& box, int depth) {
  std::vector<std::uint64_t> keys;
  std::vector<std::int64_t> x(static_cast<std::size_t>(box.dim()), 0);
  auto rec = [&](auto&& self, int axis, int budget) -> void {
    if (axis == box.dim()) {
      keys.push_back(box.pack(x));
      require(keys.size() <= kMaxDenseSites, "backward cone too large for the dense path-process simulation");
      return;
    }
    for (int k = 0; k <= budget; ++k) {
      x[static_cast<std::size_t>(axis)] = -k;
      self(self, axis + 1, budget - k);
    }
    x[static_cast<std::size_t>(axis)] = 0;
  };
  rec(rec, 0, depth);
  std::sort(keys.begin(), keys.end());
  return keys;
}

struct ConeSample {
  std::uint64_t value = 0;
  bool overflow = false;
};

template <class Fn>
void for_each_cone_replica(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts, Fn&& fn) {
  const double lambda = params.infection_rate();
  const detail::BoxIndex box(params.d, opts.box_radius);
  const std::vector<std::uint64_t> cone = backward_cone(box, opts.box_radius);
  const std::uint64_t origin = box.pack(Vertex::origin(params.d).coords());
  parallel_for_index(replicas, opts.threads, [&](std::size_t i) {
    const QuenchedEnvironment env(ModelParams{params.d, params.p, std::nullopt},
                                  seed_schedule(opts.rng_seed, "env", i));
    ZetaSimulator sim(env, lambda, box, cone, seed_schedule(opts.rng_seed, "zeta", i), t, false);
    sim.run();
    fn(i, ConeSample{sim.value_at(origin), sim.overflow()});
  });
}

}  // namespace

PathProcessConfiguration run_path_process(const QuenchedEnvironment& env, double lambda, const SimOptions& opts) {
  require(lambda > 0.0, "infection rate must be positive");
  opts.validate(env.dim());
  const detail::BoxIndex box(env.dim(), opts.box_radius);
  ZetaSimulator sim(env, lambda, box, box_sites(box), opts.rng_seed, opts.horizon, false);
  sim.run();
  return sim.zeta_configuration();
}

JointPathRun run_joint_path_contact(const QuenchedEnvironment& env, double lambda, const SimOptions& opts) {
  require(lambda > 0.0, "infection rate must be positive");
  opts.validate(env.dim());
  const detail::BoxIndex box(env.dim(), opts.box_radius);
  ZetaSimulator sim(env, lambda, box, box_sites(box), opts.rng_seed, opts.horizon, true);
  JointPathRun out;
  out.events = sim.run();
  out.zeta = sim.zeta_configuration();
  out.eta = sim.eta_configuration();
  return out;
}

ZetaMeanEstimate mean_zeta_origin(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts) {
  params.infection_rate();
  require(replicas >= 1, "replicas must be >= 1");
  require(t >= 0.0 && std::isfinite(t), "time must be nonnegative and finite");
  ZetaMeanEstimate out;
  out.analytic = analytic_mean_zeta(params, t);
  out.replicas = replicas;
  out.depth = opts.box_radius;
  out.truncation_tail = poisson_upper_tail(t * *params.lambda * params.d * params.p, opts.box_radius);
  if (t == 0.0) {
    out.mean = Estimate{1.0, 0.0, replicas};
    return out;
  }
  std::vector<ConeSample> samples(replicas);
  for_each_cone_replica(params, t, replicas, opts, [&](std::size_t i, ConeSample s) { samples[i] = s; });
  std::vector<double> kept;
  kept.reserve(replicas);
  for (const ConeSample& s : samples) {
    if (s.overflow)
      ++out.overflow_discards;
    else
      kept.push_back(static_cast<double>(s.value));
  }
  out.mean = estimate_from(kept);
  out.overflow_warning = static_cast<double>(out.overflow_discards) > 1e-3 * static_cast<double>(replicas);
  return out;
}

Estimate zeta_support_origin(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts) {
  params.infection_rate();
  require(replicas >= 1, "replicas must be >= 1");
  if (t == 0.0) return Estimate{1.0, 0.0, replicas};
  std::vector<double> hits(replicas);
  for_each_cone_replica(params, t, replicas, opts,
                        [&](std::size_t i, ConeSample s) { hits[i] = s.value >= 1 ? 1.0 : 0.0; });
  return estimate_from(hits);
}

double analytic_mean_zeta(const ModelParams& params, double t) {
  const double lambda = params.infection_rate();
  return std::exp((lambda * params.d * params.p - 1.0) * t);
}

double analytic_mean_zeta_series(const ModelParams& params, double t, int terms) {
  const double x = t * params.infection_rate() * params.d * params.p;
  double term = 1.0, sum = 1.0;
  for (int n = 1; n <= terms; ++n) {
    term *= x / n;
    sum += term;
  }
  return std::exp(-t) * sum;
}

double poisson_upper_tail(double mean, int depth) {
  if (mean <= 0.0) return 0.0;
  double tail = 0.0;
  for (int n = depth + 1;; ++n) {
    const double term = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    tail += term;
    if (n > mean && term < 1e-18 * std::max(tail, 1e-300)) break;
    if (n > depth + 10000) break;
  }
  return std::min(tail, 1.0);
}

int zeta_truncation_depth(const ModelParams& params, double t, double rel_tol) {
  const double mean = t * params.infection_rate() * params.d * params.p;
  int depth = 1;
  while (poisson_upper_tail(mean, depth) > rel_tol) ++depth;
  return depth;
}

}  // namespace ocp
