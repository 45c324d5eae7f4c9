#include "ocp/contact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include <absl/container/flat_hash_map.h>

#include "box_index.hpp"
#include "ocp/errors.hpp"
#include "ocp/graphical.hpp"
#include "ocp/parallel.hpp"
#include "ocp/random.hpp"

namespace ocp {

void SimOptions::validate(int d) const {
  require(box_radius >= 1, "box radius L must be >= 1");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon T must be positive and finite");
  if (checkpoint) require(*checkpoint >= 0.0 && *checkpoint <= horizon, "checkpoint must lie in [0, T]");
  if (probe) require(probe->dim() == d, "probe dimension does not match d");
}

bool ContactConfiguration::contains(const Vertex& v) const {
  return std::binary_search(infected.begin(), infected.end(), v);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t low_bits(int k) noexcept { return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1; }

// K coupled contact processes ("layers") driven by one HarrisMarks instance.
// Layer k accepts an arrow iff its uniform is below lambdas[k] / lambda_ref.
// Marks are only generated for sites infected in at least one active layer.
class CoupledContactRun {
 public:
  CoupledContactRun(const QuenchedEnvironment& env, std::span<const double> lambdas, double lambda_ref,
                    const SimOptions& opts)
      : env_(env),
        opts_(opts),
        box_(env.dim(), opts.box_radius),
        marks_(opts.rng_seed, lambda_ref),
        layers_(static_cast<int>(lambdas.size())) {
    opts.validate(env.dim());
    require(!lambdas.empty() && lambdas.size() <= 64, "between 1 and 64 coupled rates are supported");
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      require(lambdas[k] > 0.0, "infection rates must be positive");
      require(k == 0 || lambdas[k - 1] <= lambdas[k], "coupled rates must be nondecreasing");
      require(lambdas[k] <= lambda_ref * (1.0 + 1e-12), "reference rate must dominate every coupled rate");
      thresholds_.push_back(lambdas[k] / lambda_ref);
    }
    all_ = low_bits(layers_);
    active_ = all_;
    count_.assign(static_cast<std::size_t>(layers_), 0);
    results_.resize(static_cast<std::size_t>(layers_));
    const Vertex probe = opts.probe.value_or(Vertex::origin(env.dim()));
    if (box_.contains(probe.coords())) probe_key_ = box_.pack(probe.coords());
  }

  std::vector<RunResult> run(std::span<const Vertex> initial) {
    require(!initial.empty(), "initial infected set must be nonempty");
    std::vector<std::uint64_t> keys;
    keys.reserve(initial.size());
    for (const Vertex& v : initial) {
      require(v.dim() == env_.dim(), "initial vertex dimension does not match d");
      require(box_.contains(v.coords()), "initial vertex lies outside the simulation box");
      keys.push_back(box_.pack(v.coords()));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    sites_.reserve(keys.size() * 2);
    for (std::uint64_t key : keys) {
      sites_[key].mask = all_;
      for (int k = 0; k < layers_; ++k) ++count_[static_cast<std::size_t>(k)];
      if (key == probe_key_) record_probe(all_, 0.0, true);
      activate(key, 0.0);
    }
    check_caps(all_, 0.0);

    while (!queue_.empty() && active_ != 0) {
      const Event ev = queue_.top();
      if (ev.time > opts_.horizon) break;
      queue_.pop();
      maybe_checkpoint(ev.time);
      ++events_;
      if (ev.axis < 0)
        recover(ev);
      else
        fire_arrow(ev);
      if (active_ == 0 || count_[static_cast<std::size_t>(63 - std::countl_zero(active_))] == 0) break;
    }
    maybe_checkpoint(kInf);
    return finish();
  }

 private:
  struct Site {
    std::uint64_t mask = 0;
    std::uint32_t epoch = 0;
    std::uint32_t spread = 0;
    bool spread_known = false;
  };

  struct Event {
    double time;
    double uniform;
    std::uint64_t site;
    std::uint32_t epoch;
    std::int32_t axis;  // -1 for recovery
  };

  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      if (a.site != b.site) return a.site > b.site;
      return a.axis > b.axis;
    }
  };

  // The site just became infected in some active layer: schedule its clocks.
  void activate(std::uint64_t key, double t) {
    Site& s = sites_[key];
    ++s.epoch;
    if (!s.spread_known) {
      std::int64_t x[kMaxMaskDim];
      box_.unpack(key, x);
      const std::span<const std::int64_t> xs(x, static_cast<std::size_t>(env_.dim()));
      s.spread = opts_.direction == Direction::forward ? env_.out_mask(xs) : env_.in_mask(xs);
      s.spread_known = true;
    }
    const std::uint32_t epoch = s.epoch;
    const std::uint32_t spread = s.spread;
    const double rec = marks_.next_recovery(key, t, opts_.horizon);
    if (rec < kInf) queue_.push({rec, 0.0, key, epoch, -1});
    for (std::uint32_t m = spread; m != 0; m &= m - 1) {
      const int axis = std::countr_zero(m);
      const ArrowMark a = marks_.next_arrow(key, axis, t, opts_.horizon);
      if (a.time < kInf) queue_.push({a.time, a.uniform, key, epoch, axis});
    }
  }

  void recover(const Event& ev) {
    auto it = sites_.find(ev.site);
    Site& s = it->second;
    if (s.epoch != ev.epoch) return;
    const std::uint64_t m = s.mask & active_;
    if (m == 0) return;
    s.mask = 0;
    ++s.epoch;
    for (std::uint64_t b = m; b != 0; b &= b - 1) {
      const auto k = static_cast<std::size_t>(std::countr_zero(b));
      if (--count_[k] == 0) results_[k].extinction_time = ev.time;
    }
    if (ev.site == probe_key_) record_probe(m, ev.time, false);
  }

  void fire_arrow(const Event& ev) {
    auto it = sites_.find(ev.site);
    if (it->second.epoch != ev.epoch) return;
    const std::uint64_t src = it->second.mask & active_;
    if (src == 0) return;

    const ArrowMark next = marks_.next_arrow(ev.site, ev.axis, ev.time, opts_.horizon);
    if (next.time < kInf) queue_.push({next.time, next.uniform, ev.site, ev.epoch, ev.axis});

    int first = 0;
    while (first < layers_ && !(ev.uniform < thresholds_[static_cast<std::size_t>(first)])) ++first;
    const std::uint64_t accepted = src & all_ & ~low_bits(first);
    if (accepted == 0) return;

    const std::int64_t c = box_.coord(ev.site, ev.axis);
    const bool forward = opts_.direction == Direction::forward;
    if ((forward && c >= box_.radius()) || (!forward && c <= -box_.radius())) {
      for (std::uint64_t b = accepted; b != 0; b &= b - 1)
        ++results_[static_cast<std::size_t>(std::countr_zero(b))].boundary_hits;
      return;
    }
    const std::uint64_t stride = box_.stride(ev.axis);
    const std::uint64_t target = forward ? ev.site + stride : ev.site - stride;

    Site& tg = sites_[target];
    const std::uint64_t fresh = accepted & ~tg.mask;
    if (fresh == 0) return;
    const bool was_infected = (tg.mask & active_) != 0;
    tg.mask |= fresh;
    if (layers_ > 1) check_inclusion(tg.mask & active_);
    for (std::uint64_t b = fresh; b != 0; b &= b - 1) ++count_[static_cast<std::size_t>(std::countr_zero(b))];
    if (target == probe_key_) record_probe(fresh, ev.time, true);
    if (!was_infected) activate(target, ev.time);
    check_caps(fresh, ev.time);
  }

  // Layers are ordered by rate, so an infected set in layer k must also be
  // infected in every higher active layer.
  void check_inclusion(std::uint64_t m) const {
    if (m == 0) return;
    const std::uint64_t expected = active_ & ~low_bits(std::countr_zero(m));
    if (m != expected) throw std::logic_error("coupled contact processes violated pathwise inclusion");
  }

  void check_caps(std::uint64_t touched, double t) {
    if (opts_.population_cap == 0) return;
    for (std::uint64_t b = touched & active_; b != 0; b &= b - 1) {
      const int k = std::countr_zero(b);
      if (count_[static_cast<std::size_t>(k)] < opts_.population_cap) continue;
      // Inclusion gives count[j] >= count[k] for j > k: retire all of them.
      for (int j = k; j < layers_; ++j) {
        if (!(active_ >> j & 1U)) continue;
        RunResult& r = results_[static_cast<std::size_t>(j)];
        r.capped = true;
        r.final = snapshot(j, t);
      }
      active_ &= low_bits(k);
      return;
    }
  }

  void maybe_checkpoint(double t) {
    if (checkpoint_done_) return;
    const double cp = opts_.checkpoint.value_or(opts_.horizon);
    if (t <= cp) return;
    checkpoint_done_ = true;
    for (int k = 0; k < layers_; ++k) {
      RunResult& r = results_[static_cast<std::size_t>(k)];
      r.alive_at_checkpoint = r.capped || count_[static_cast<std::size_t>(k)] > 0;
    }
  }

  void record_probe(std::uint64_t layers_changed, double t, bool infected) {
    for (std::uint64_t b = layers_changed; b != 0; b &= b - 1)
      results_[static_cast<std::size_t>(std::countr_zero(b))].probe_trace.emplace_back(t, infected);
  }

  ContactConfiguration snapshot(int layer, double t) const {
    ContactConfiguration cfg;
    cfg.time = t;
    const std::uint64_t bit = std::uint64_t{1} << layer;
    for (const auto& [key, site] : sites_)
      if (site.mask & bit) cfg.infected.push_back(box_.vertex(key));
    std::sort(cfg.infected.begin(), cfg.infected.end());
    return cfg;
  }

  std::vector<RunResult> finish() {
    for (int k = 0; k < layers_; ++k) {
      RunResult& r = results_[static_cast<std::size_t>(k)];
      r.events = events_;
      if (r.capped) {
        r.alive_at_horizon = true;
        continue;
      }
      r.final = snapshot(k, opts_.horizon);
      r.alive_at_horizon = !r.final.infected.empty();
      if (!r.alive_at_horizon && r.extinction_time) r.final.time = *r.extinction_time;
    }
    return std::move(results_);
  }

  const QuenchedEnvironment& env_;
  SimOptions opts_;
  detail::BoxIndex box_;
  HarrisMarks marks_;
  int layers_;
  std::vector<double> thresholds_;
  std::uint64_t all_ = 0;
  std::uint64_t active_ = 0;
  std::vector<std::size_t> count_;
  std::vector<RunResult> results_;
  absl::flat_hash_map<std::uint64_t, Site> sites_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t probe_key_ = ~std::uint64_t{0};
  std::uint64_t events_ = 0;
  bool checkpoint_done_ = false;
};

QuenchedEnvironment replica_environment(const ModelParams& params, SurvivalMode mode, std::uint64_t master,
                                        std::size_t replica) {
  const ModelParams geometry{params.d, params.p, std::nullopt};
  if (mode.kind == EnvironmentMode::annealed)
    return QuenchedEnvironment(geometry, seed_schedule(master, "env", replica));
  if (mode.origin_offset) return QuenchedEnvironment(geometry, mode.env_seed, *mode.origin_offset);
  return QuenchedEnvironment(geometry, mode.env_seed);
}

Estimate occupation_estimate(const ModelParams& params, double t, const Vertex& probe, std::size_t replicas,
                             const SimOptions& opts, SurvivalMode mode) {
  const double lambda = params.infection_rate();
  require(replicas >= 1, "replicas must be >= 1");
  require(t >= 0.0, "time must be nonnegative");
  require(probe.dim() == params.d, "probe dimension does not match d");
  if (t == 0.0) return Estimate{1.0, 0.0, replicas};
  SimOptions base = opts;
  base.horizon = t;
  base.checkpoint.reset();
  base.probe = probe;
  base.validate(params.d);
  const std::vector<Vertex> initial = sites_influencing(probe, params.d, opts.box_radius, opts.direction);
  std::vector<double> hits(replicas, 0.0);
  parallel_for_index(replicas, opts.threads, [&](std::size_t i) {
    const QuenchedEnvironment env = replica_environment(params, mode, opts.rng_seed, i);
    SimOptions o = base;
    o.rng_seed = seed_schedule(opts.rng_seed, "process", i);
    const RunResult r = run_quenched(env, lambda, initial, o);
    hits[i] = r.final.contains(probe) ? 1.0 : 0.0;
  });
  return estimate_from(hits);
}

}  // namespace

RunResult run_quenched(const QuenchedEnvironment& env, double lambda, std::span<const Vertex> initial,
                       const SimOptions& opts) {
  const double rates[] = {lambda};
  return run_coupled(env, rates, lambda, initial, opts).front();
}

std::pair<RunResult, RunResult> run_coupled_pair(const QuenchedEnvironment& env, double lambda_low,
                                                 double lambda_high, std::span<const Vertex> initial,
                                                 const SimOptions& opts) {
  require(lambda_low <= lambda_high, "coupled pair requires lambda_low <= lambda_high");
  const double rates[] = {lambda_low, lambda_high};
  auto results = run_coupled(env, rates, lambda_high, initial, opts);
  return {std::move(results[0]), std::move(results[1])};
}

std::vector<RunResult> run_coupled(const QuenchedEnvironment& env, std::span<const double> lambdas,
                                   double lambda_ref, std::span<const Vertex> initial, const SimOptions& opts) {
  CoupledContactRun run(env, lambdas, lambda_ref, opts);
  return run.run(initial);
}

std::vector<Vertex> sites_influencing(const Vertex& probe, int d, int box_radius, Direction direction) {
  require(probe.dim() == d, "probe dimension does not match d");
  std::vector<std::int64_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = direction == Direction::forward ? -box_radius : std::max<std::int64_t>(probe[i], -box_radius);
    hi[i] = direction == Direction::forward ? std::min<std::int64_t>(probe[i], box_radius) : box_radius;
    if (lo[i] > hi[i]) return {};
  }
  std::vector<Vertex> out;
  std::vector<std::int64_t> x = lo;
  for (;;) {
    out.emplace_back(x);
    std::size_t i = 0;
    while (i < x.size() && x[i] == hi[i]) x[i] = lo[i], ++i;
    if (i == x.size()) break;
    ++x[i];
  }
  return out;
}

Estimate annealed_occupation(const ModelParams& params, double t, const Vertex& probe, std::size_t replicas,
                             const SimOptions& opts) {
  return occupation_estimate(params, t, probe, replicas, opts, SurvivalMode::annealed());
}

std::vector<SurvivalEstimate> survival_curve(const ModelParams& params, std::span<const double> lambdas,
                                             double lambda_ref, const SimOptions& opts, std::size_t replicas,
                                             SurvivalMode mode) {
  ModelParams geometry{params.d, params.p, std::nullopt};
  geometry.validate();
  opts.validate(params.d);
  require(replicas >= 1, "replicas must be >= 1");
  const std::size_t layers = lambdas.size();
  const Vertex origin = Vertex::origin(params.d);
  std::vector<RunResult> slots(replicas * layers);
  parallel_for_index(replicas, opts.threads, [&](std::size_t i) {
    const QuenchedEnvironment env = replica_environment(geometry, mode, opts.rng_seed, i);
    SimOptions o = opts;
    o.rng_seed = seed_schedule(opts.rng_seed, "process", i);
    auto results = run_coupled(env, lambdas, lambda_ref, std::span<const Vertex>(&origin, 1), o);
    for (std::size_t k = 0; k < layers; ++k) {
      // Keep only the scalars; the configurations can be large.
      RunResult& slot = slots[i * layers + k];
      slot.alive_at_horizon = results[k].alive_at_horizon;
      slot.alive_at_checkpoint = results[k].alive_at_checkpoint;
      slot.boundary_hits = results[k].boundary_hits;
      slot.capped = results[k].capped;
    }
  });
  std::vector<SurvivalEstimate> out(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    std::size_t alive = 0, alive_cp = 0;
    for (std::size_t i = 0; i < replicas; ++i) {
      const RunResult& r = slots[i * layers + k];
      alive += r.alive_at_horizon ? 1 : 0;
      alive_cp += r.alive_at_checkpoint ? 1 : 0;
      out[k].boundary_hits += r.boundary_hits;
      out[k].capped += r.capped ? 1 : 0;
    }
    out[k].survival = proportion(alive, replicas);
    out[k].survival_checkpoint = proportion(alive_cp, replicas);
  }
  return out;
}

SurvivalEstimate survival_probability(const ModelParams& params, const SimOptions& opts, std::size_t replicas,
                                      SurvivalMode mode) {
  const double lambda = params.infection_rate();
  const double rates[] = {lambda};
  return survival_curve(params, rates, lambda, opts, replicas, mode).front();
}

DualityCheck check_self_duality(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts,
                                std::optional<std::uint64_t> env_seed) {
  params.infection_rate();
  require(t >= 0.0, "time must be nonnegative");
  DualityCheck out;
  if (t == 0.0) {
    out.forward = out.dual = Estimate{1.0, 0.0, replicas};
    return out;
  }
  const SurvivalMode mode = env_seed ? SurvivalMode::quenched(*env_seed) : SurvivalMode::annealed();
  SimOptions fwd = opts;
  fwd.direction = Direction::forward;
  fwd.rng_seed = seed_schedule(opts.rng_seed, "selfdual-all-infected", 0);
  out.forward = occupation_estimate(params, t, Vertex::origin(params.d), replicas, fwd, mode);

  SimOptions single = opts;
  single.direction = Direction::forward;
  single.horizon = t;
  single.checkpoint.reset();
  single.rng_seed = seed_schedule(opts.rng_seed, "selfdual-single-site", 0);
  out.dual = survival_probability(params, single, replicas, mode).survival;
  out.combined_se = combined_se(out.forward, out.dual);
  return out;
}

}  // namespace ocp
