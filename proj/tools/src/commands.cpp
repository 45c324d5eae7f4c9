#include "commands.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "ocp/contact.hpp"
#include "ocp/environment.hpp"
#include "ocp/errors.hpp"
#include "ocp/estimator.hpp"
#include "ocp/mean_field.hpp"
#include "ocp/path_process.hpp"
#include "ocp/random.hpp"
#include "ocp/sir.hpp"
#include "ocp/walk_pair.hpp"

namespace ocp::cli {

namespace {

json to_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}, {"n", e.n}}; }

json to_json(const Interval& i) { return json::array({i.low, i.high}); }

json to_json(const SurvivalPoint& s) {
  return {{"lambda", s.lambda},
          {"survival", to_json(s.survival)},
          {"survival_checkpoint", to_json(s.survival_checkpoint)},
          {"boundary_hits", s.boundary_hits},
          {"capped", s.capped}};
}

json to_json(const CriticalEstimate& c) {
  json evals = json::array();
  for (const auto& e : c.evaluations) evals.push_back(to_json(e));
  json mode = c.mode.kind == EnvironmentMode::annealed ? json("annealed") : json{{"quenched", c.mode.env_seed}};
  return {{"d", c.params.d},
          {"p", c.params.p},
          {"mode", mode},
          {"lambda_hat", c.lambda_hat},
          {"ci", to_json(c.ci)},
          {"bracket", to_json(c.bracket)},
          {"checkpoint_ci", c.checkpoint_ci ? to_json(*c.checkpoint_ci) : json(nullptr)},
          {"T", c.config.horizon},
          {"T_checkpoint", c.config.checkpoint_time()},
          {"L", c.config.box_radius},
          {"replicas", c.config.replicas},
          {"epsilon", c.config.threshold},
          {"tol", c.tol},
          {"lambda_ref", c.lambda_ref},
          {"evaluations", evals}};
}

std::string dump(const std::string& command, const ParamSet& ps, json result) {
  json out = provenance(command, ps.resolved());
  out["result"] = std::move(result);
  return out.dump(2) + "\n";
}

std::string csv_header(const std::string& command, const ParamSet& ps, const json& extra = json::object()) {
  json head = provenance(command, ps.resolved());
  for (auto it = extra.begin(); it != extra.end(); ++it) head[it.key()] = it.value();
  return "# " + head.dump() + "\n";
}

std::string csv_cell(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

void common(ParamSet& ps) {
  ps.add("master_seed", Kind::unsigned_integer, 0, "master seed for every derived stream");
  ps.add("threads", Kind::integer, 1, "worker threads (0 = all cores); results do not depend on it");
}

void model(ParamSet& ps, bool with_lambda) {
  ps.add("d", Kind::integer, nullptr, "lattice dimension");
  ps.add("p", Kind::real, nullptr, "edge-open probability");
  if (with_lambda) ps.add("lambda", Kind::real, nullptr, "infection rate");
}

ModelParams model_of(const ParamSet& ps) {
  ModelParams m{ps.get<int>("d"), ps.get<double>("p"), ps.maybe<double>("lambda")};
  m.validate();
  return m;
}

std::uint64_t env_seed_of(ParamSet& ps) {
  if (!ps.has("env_seed")) ps.set("env_seed", seed_schedule(ps.get<std::uint64_t>("master_seed"), "env", 0));
  return ps.get<std::uint64_t>("env_seed");
}

void estimator_flags(ParamSet& ps) {
  ps.add("epsilon", Kind::real, 0.02, "survival threshold");
  ps.add("horizon", Kind::real, 30.0, "survival horizon T");
  ps.add("checkpoint", Kind::real, nullptr, "second horizon (default T/2)", true);
  ps.add("box_radius", Kind::integer, 40, "box half-width L");
  ps.add("replicas", Kind::unsigned_integer, 2000, "replicas per survival point");
  ps.add("population_cap", Kind::unsigned_integer, 5000, "infected-site count treated as survival (0 = off)");
  ps.add("probes", Kind::integer, 4, "starting vertices per quenched environment");
}

EstimatorConfig estimator_config(ParamSet& ps) {
  EstimatorConfig c;
  c.threshold = ps.get<double>("epsilon");
  c.horizon = ps.get<double>("horizon");
  c.checkpoint = ps.maybe<double>("checkpoint");
  if (!c.checkpoint) ps.set("checkpoint", c.checkpoint_time());
  c.box_radius = ps.get<int>("box_radius");
  c.replicas = ps.get<std::size_t>("replicas");
  c.population_cap = ps.get<std::size_t>("population_cap");
  c.quenched_probes = ps.get<int>("probes");
  c.master_seed = ps.get<std::uint64_t>("master_seed");
  c.threads = ps.get<int>("threads");
  c.validate();
  return c;
}

SurvivalMode mode_of(ParamSet& ps) {
  const auto mode = ps.get<std::string>("mode");
  if (mode == "annealed") return SurvivalMode::annealed();
  if (mode == "quenched") return SurvivalMode::quenched(env_seed_of(ps));
  throw UsageError(fmt::format("--mode must be annealed or quenched, got '{}'", mode));
}

// ---- simulate ----

void declare_simulate(ParamSet& ps) {
  model(ps, true);
  ps.add("t", Kind::real, 10.0, "horizon");
  ps.add("box_radius", Kind::integer, 40, "box half-width L");
  ps.add("direction", Kind::text, "forward", "forward or dual");
  ps.add("initial", Kind::text, "origin", "origin, or all (every box site that can reach the origin)");
  ps.add("population_cap", Kind::unsigned_integer, 0, "stop once this many sites are infected (0 = off)");
  ps.add("env_seed", Kind::unsigned_integer, nullptr, "environment seed (default derived from the master seed)", true);
  ps.add("max_sites_listed", Kind::integer, 1000, "largest final configuration written out in full");
  common(ps);
}

std::string run_simulate(ParamSet& ps) {
  const ModelParams m = model_of(ps);
  const double lambda = m.infection_rate();
  SimOptions o;
  o.horizon = ps.get<double>("t");
  o.box_radius = ps.get<int>("box_radius");
  const auto dir = ps.get<std::string>("direction");
  if (dir != "forward" && dir != "dual") throw UsageError("--direction must be forward or dual");
  o.direction = dir == "forward" ? Direction::forward : Direction::dual;
  o.population_cap = ps.get<std::size_t>("population_cap");
  o.rng_seed = seed_schedule(ps.get<std::uint64_t>("master_seed"), "process", 0);
  const QuenchedEnvironment env(ModelParams{m.d, m.p, std::nullopt}, env_seed_of(ps));
  const auto init = ps.get<std::string>("initial");
  std::vector<Vertex> initial;
  if (init == "origin")
    initial.push_back(Vertex::origin(m.d));
  else if (init == "all")
    initial = sites_influencing(Vertex::origin(m.d), m.d, o.box_radius, o.direction);
  else
    throw UsageError("--initial must be origin or all");
  const RunResult r = run_quenched(env, lambda, initial, o);
  json sites = json::array();
  const bool listed = static_cast<long long>(r.final.size()) <= ps.get<long long>("max_sites_listed");
  if (listed)
    for (const auto& v : r.final.infected) sites.push_back(std::vector<std::int64_t>(v.coords().begin(), v.coords().end()));
  json trace = json::array();
  for (const auto& [t, state] : r.probe_trace) trace.push_back(json::array({t, state}));
  return dump("simulate", ps,
              {{"alive_at_horizon", r.alive_at_horizon},
               {"extinction_time", r.extinction_time ? json(*r.extinction_time) : json(nullptr)},
               {"final_time", r.final.time},
               {"final_size", r.final.size()},
               {"final_sites", listed ? sites : json(nullptr)},
               {"origin_trace", trace},
               {"boundary_hits", r.boundary_hits},
               {"capped", r.capped},
               {"events", r.events},
               {"environment", env.to_json()}});
}

// ---- zeta ----

void declare_zeta(ParamSet& ps) {
  model(ps, true);
  ps.add("t", Kind::real, nullptr, "time");
  ps.add("replicas", Kind::unsigned_integer, 100000, "annealed replicas");
  ps.add("depth", Kind::integer, nullptr, "l1 depth of the backward cone (default: automatic)", true);
  common(ps);
}

std::string run_zeta(ParamSet& ps) {
  const ModelParams m = model_of(ps);
  const double t = ps.get<double>("t");
  if (!ps.has("depth")) ps.set("depth", zeta_truncation_depth(m, t));
  SimOptions o;
  o.box_radius = std::max(1, ps.get<int>("depth"));
  o.rng_seed = ps.get<std::uint64_t>("master_seed");
  o.threads = ps.get<int>("threads");
  const ZetaMeanEstimate z = mean_zeta_origin(m, t, ps.get<std::size_t>("replicas"), o);
  return dump("zeta", ps,
              {{"mean", z.mean.mean},
               {"se", z.mean.se},
               {"analytic", z.analytic},
               {"replicas", z.replicas},
               {"overflow_discards", z.overflow_discards},
               {"overflow_warning", z.overflow_warning},
               {"depth", z.depth},
               {"truncation_tail", z.truncation_tail},
               {"within_3se", within_se(z.mean, z.analytic, 3.0)}});
}

// ---- paths ----

void declare_paths(ParamSet& ps) {
  model(ps, false);
  ps.add("lambda", Kind::real, nullptr, "infection rate; enables the second-moment bound", true);
  ps.add("n", Kind::integer, nullptr, "path length");
  ps.add("seeds", Kind::unsigned_integer, 10000, "environments for the open-path count");
  ps.add("fields", Kind::unsigned_integer, 10000, "trial fields for the second-moment bound");
  common(ps);
}

std::string run_paths(ParamSet& ps) {
  const ModelParams m = model_of(ps);
  const int n = ps.get<int>("n");
  const auto master = ps.get<std::uint64_t>("master_seed");
  const int threads = ps.get<int>("threads");
  const Estimate l = mean_open_path_count(m, n, ps.get<std::size_t>("seeds"), master, threads);
  json result{{"open_paths", {{"mean", l.mean}, {"se", l.se}, {"expected", std::pow(m.d * m.p, n)}}}};
  if (m.lambda) {
    const SecondMomentResult s =
        second_moment_bound(m, n, ps.get<std::size_t>("fields"), seed_schedule(master, "sir", 0), threads);
    json sm{{"first", to_json(s.first)},
            {"second", to_json(s.second)},
            {"direct", to_json(s.direct)},
            {"bound", s.bound},
            {"bound_se", s.bound_se},
            {"q1", single_infection_probability(*m.lambda, m.p)},
            {"q2", pair_infection_probability(*m.lambda, m.p)},
            {"expected_first", std::pow(m.d * single_infection_probability(*m.lambda, m.p), n)}};
    try {
      sm["exact_second"] = exact_second_moment(m, n);
    } catch (const std::exception&) {
      sm["exact_second"] = nullptr;
    }
    result["second_moment"] = sm;
  }
  return dump("paths", ps, result);
}

// ---- walks ----

void declare_walks(ParamSet& ps) {
  ps.add("d", Kind::int_list, json::array({2, 3, 4, 5, 6}), "dimensions");
  ps.add("horizons", Kind::int_list, json::array({100, 400, 1600}), "horizons N");
  ps.add("replicas", Kind::unsigned_integer, 20000, "walk pairs per dimension");
  ps.add("p", Kind::real, nullptr, "edge-open probability (for the moment and the bound)", true);
  ps.add("lambda", Kind::real, nullptr, "infection rate (for the moment)", true);
  common(ps);
}

std::string run_walks(ParamSet& ps) {
  const auto ds = ps.get<std::vector<int>>("d");
  const auto horizons = ps.get<std::vector<std::int64_t>>("horizons");
  if (ds.empty() || horizons.empty()) throw UsageError("--d and --horizons must be nonempty");
  const std::int64_t longest = *std::max_element(horizons.begin(), horizons.end());
  const auto replicas = ps.get<std::size_t>("replicas");
  const auto master = ps.get<std::uint64_t>("master_seed");
  const auto p = ps.maybe<double>("p");
  const auto lambda = ps.maybe<double>("lambda");
  json rows = json::array();
  std::vector<ThetaTailEstimate> last;
  for (int d : ds) {
    const auto traces = simulate_pairs(d, longest, replicas, seed_schedule(master, "walks", static_cast<std::uint64_t>(d)),
                                       ps.get<int>("threads"));
    const auto profile = theta_tail_profile(traces, horizons);
    last.push_back(profile.back());
    json tail = json::array();
    for (const auto& r : profile)
      tail.push_back({{"N", r.horizon}, {"theta_tail", r.tail.mean}, {"se", r.tail.se}, {"C", r.c_hat}, {"C_se", r.c_hat_se}});
    std::size_t theta_one = 0;
    for (const auto& tr : traces) theta_one += tr.theta == 1 ? 1 : 0;
    json row{{"d", d}, {"theta_tail", tail}, {"theta_one", to_json(proportion(theta_one, traces.size()))}};
    if (p && lambda) {
      if (d == 1) {
        row["moment"] = nullptr;
        row["moment_note"] = "r_1 = infinity almost surely";
      } else {
        const LemmaMoment lm = lemma_moment(traces, *p, *lambda, horizons);
        json pts = json::array();
        for (const auto& pt : lm.points) pts.push_back({{"N", pt.horizon}, {"moment", pt.moment.mean}, {"se", pt.moment.se}});
        const MomentDecomposition md = moment_decomposition(traces, *p, *lambda);
        row["moment"] = pts;
        row["moment_stabilized"] = lm.stabilized;
        row["decomposition"] = {{"q", md.q},
                                {"sigma_term", to_json(md.sigma_term)},
                                {"rho_term", to_json(md.rho_term)},
                                {"finite", md.finite},
                                {"value", md.finite ? json(md.value) : json(nullptr)},
                                {"value_se", md.finite ? json(md.value_se) : json(nullptr)}};
      }
    }
    rows.push_back(row);
  }
  const double c_hat = empirical_c_hat(last);
  json result{{"rows", rows}, {"C_hat", c_hat}, {"C_hat_label", "empirical"}};
  if (p) {
    json bounds = json::array();
    for (int d : ds) {
      const auto ub = upper_bound_lambda(d, *p, c_hat);
      bounds.push_back({{"d", d}, {"lower", 1.0 / (d * *p)}, {"upper_empirical", ub ? json(*ub) : json(nullptr)}});
    }
    result["bounds"] = bounds;
  }
  return dump("walks", ps, result);
}

// ---- meanfield ----

void declare_meanfield(ParamSet& ps) {
  ps.add("a", Kind::real, nullptr, "lambda d p");
  ps.add("t_max", Kind::real, nullptr, "last time");
  ps.add("dt", Kind::real, 0.1, "output spacing");
  ps.add("step", Kind::real, 1e-3, "RK4 step for the numeric column");
}

std::string run_meanfield(ParamSet& ps) {
  const double a = ps.get<double>("a");
  const auto exact = trajectory(a, ps.get<double>("t_max"), ps.get<double>("dt"));
  const auto numeric = trajectory(a, ps.get<double>("t_max"), ps.get<double>("dt"), true, ps.get<double>("step"));
  std::string out = csv_header("meanfield", ps, {{"limit", mean_field_limit(a)}});
  out += "t,f,f_numeric\n";
  for (std::size_t i = 0; i < exact.size(); ++i)
    out += fmt::format("{},{},{}\n", format_real(exact[i].t), format_real(exact[i].f), format_real(numeric[i].f));
  return out;
}

// ---- selfdual ----

void declare_selfdual(ParamSet& ps) {
  model(ps, true);
  ps.add("t", Kind::real, 1.0, "time");
  ps.add("replicas", Kind::unsigned_integer, 100000, "replicas per side");
  ps.add("box_radius", Kind::integer, 20, "box half-width L");
  ps.add("env_seed", Kind::unsigned_integer, nullptr, "fix one environment (quenched check)", true);
  common(ps);
}

std::string run_selfdual(ParamSet& ps) {
  const ModelParams m = model_of(ps);
  SimOptions o;
  o.box_radius = ps.get<int>("box_radius");
  o.rng_seed = ps.get<std::uint64_t>("master_seed");
  o.threads = ps.get<int>("threads");
  const DualityCheck c = check_self_duality(m, ps.get<double>("t"), ps.get<std::size_t>("replicas"), o,
                                            ps.maybe<std::uint64_t>("env_seed"));
  return dump("selfdual", ps,
              {{"forward", to_json(c.forward)},
               {"dual", to_json(c.dual)},
               {"combined_se", c.combined_se},
               {"difference", c.forward.mean - c.dual.mean},
               {"within_3se", std::abs(c.forward.mean - c.dual.mean) <= 3.0 * c.combined_se}});
}

// ---- estimate ----

void declare_estimate(ParamSet& ps) {
  model(ps, false);
  estimator_flags(ps);
  ps.add("lo", Kind::real, nullptr, "bracket low (default 0.5/(dp), widened if needed)", true);
  ps.add("hi", Kind::real, nullptr, "bracket high (default 2/(dp), widened if needed)", true);
  ps.add("hi_limit", Kind::real, nullptr, "largest rate tried when widening (default 64/(dp))", true);
  ps.add("tol", Kind::real, 0.01, "bisection tolerance");
  ps.add("mode", Kind::text, "annealed", "annealed or quenched");
  ps.add("env_seed", Kind::unsigned_integer, nullptr, "environment for quenched mode", true);
  ps.add("env_seeds", Kind::unsigned_list, nullptr, "five or more seeds: compare quenched against annealed", true);
  common(ps);
}

std::string run_estimate(ParamSet& ps) {
  const ModelParams m = model_of(ps);
  const EstimatorConfig c = estimator_config(ps);
  const double unit = 1.0 / (m.d * m.p);
  if (!ps.has("hi_limit")) ps.set("hi_limit", 64.0 * unit);
  const double tol = ps.get<double>("tol");
  const double hi_limit = ps.get<double>("hi_limit");
  const bool explicit_bracket = ps.has("lo") && ps.has("hi");
  if (!ps.has("lo")) ps.set("lo", 0.5 * unit);
  if (!ps.has("hi")) ps.set("hi", 2.0 * unit);
  const Interval start{ps.get<double>("lo"), ps.get<double>("hi")};

  if (ps.has("env_seeds")) {
    const auto seeds = ps.get<std::vector<std::uint64_t>>("env_seeds");
    const auto cmp = quenched_annealed_compare(m, seeds, start, tol, hi_limit, c);
    json rows = json::array();
    for (const auto& r : cmp.quenched)
      rows.push_back({{"env_seed", r.env_seed},
                      {"estimate", r.estimate ? to_json(*r.estimate) : json(nullptr)},
                      {"failure", r.failure}});
    return dump("estimate", ps,
                {{"annealed", to_json(cmp.annealed)},
                 {"quenched", rows},
                 {"max_deviation", cmp.max_deviation},
                 {"all_overlap", cmp.all_overlap}});
  }

  const SurvivalMode mode = mode_of(ps);
  Interval bracket = start;
  if (!explicit_bracket) {
    const BracketSearch search = find_bracket(m, start, hi_limit, mode, c);
    if (!search.bracket)
      throw BracketError(fmt::format("no threshold crossing up to lambda={}", search.highest_tested), 0.0, 0.0);
    bracket = *search.bracket;
  }
  const CriticalEstimate est = bisect_lambda_c(m, bracket, tol, mode, c);
  json result = to_json(est);
  result["lower_bound"] = unit;
  return dump("estimate", ps, result);
}

// ---- sweep ----

void declare_sweep(ParamSet& ps) {
  model(ps, false);
  estimator_flags(ps);
  ps.add("lambdas", Kind::real_list, nullptr, "strictly increasing rate grid");
  ps.add("mode", Kind::text, "annealed", "annealed or quenched");
  ps.add("env_seed", Kind::unsigned_integer, nullptr, "environment for quenched mode", true);
  common(ps);
}

std::string run_sweep(ParamSet& ps) {
  const ModelParams m = model_of(ps);
  const EstimatorConfig c = estimator_config(ps);
  const auto grid = ps.get<std::vector<double>>("lambdas");
  const SurvivalMode mode = mode_of(ps);
  const SweepRecord rec = sweep(m, grid, mode, c);
  std::string out = csv_header("sweep", ps, {{"lambda_ref", rec.lambda_ref}, {"warnings", rec.warnings}});
  out += "lambda,survival,survival_se,survival_checkpoint,survival_checkpoint_se,boundary_hits,capped\n";
  for (const auto& pt : rec.points)
    out += fmt::format("{},{},{},{},{},{},{}\n", format_real(pt.lambda), format_real(pt.survival.mean),
                       format_real(pt.survival.se), format_real(pt.survival_checkpoint.mean),
                       format_real(pt.survival_checkpoint.se), pt.boundary_hits, pt.capped);
  return out;
}

// ---- scaling ----

void declare_scaling(ParamSet& ps) {
  ps.add("p", Kind::real, 0.5, "edge-open probability");
  ps.add("d_list", Kind::int_list, json::array({2, 3, 4, 5}), "increasing dimensions");
  estimator_flags(ps);
  ps.add("tol", Kind::real, 0.02, "bisection tolerance");
  ps.add("limit", Kind::real, 64.0, "largest rate tried, in units of 1/(dp)");
  ps.add("c_hat", Kind::real, nullptr, "collision constant for the upper-bound column", true);
  common(ps);
}

std::string run_scaling(ParamSet& ps) {
  const EstimatorConfig c = estimator_config(ps);
  ScalingOptions o;
  o.tol = ps.get<double>("tol");
  o.limit = ps.get<double>("limit");
  o.c_hat = ps.maybe<double>("c_hat");
  const auto ds = ps.get<std::vector<int>>("d_list");
  const auto rows = scaling_table(ps.get<double>("p"), ds, o, c);
  std::string out = csv_header("scaling", ps);
  out += "d,lambda_hat,dp_lambda_hat,ci_low,ci_high,lower,upper_empirical,exceeds,failure\n";
  for (const auto& r : rows) {
    std::optional<double> lh, lo, hi;
    if (r.estimate) lh = r.estimate->lambda_hat, lo = r.estimate->ci.low, hi = r.estimate->ci.high;
    out += fmt::format("{},{},{},{},{},{},{},{},\"{}\"\n", r.d, csv_cell(lh), csv_cell(r.scaled()), csv_cell(lo),
                       csv_cell(hi), format_real(r.lower), csv_cell(r.upper), csv_cell(r.exceeds), r.failure);
  }
  return out;
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> all{
      {"simulate", "one quenched contact-process run", declare_simulate, run_simulate},
      {"zeta", "annealed mean of the binary contact path process at the origin", declare_zeta, run_zeta},
      {"paths", "open-path counts and the infection-path second-moment bound", declare_paths, run_paths},
      {"walks", "walk-pair collision statistics, the moment condition and the upper bound", declare_walks, run_walks},
      {"meanfield", "mean-field trajectory as CSV", declare_meanfield, run_meanfield},
      {"selfdual", "both sides of the annealed self-duality identity", declare_selfdual, run_selfdual},
      {"estimate", "pseudo-critical rate by bisection", declare_estimate, run_estimate},
      {"sweep", "survival over a rate grid as CSV", declare_sweep, run_sweep},
      {"scaling", "pseudo-critical rate per dimension as CSV", declare_scaling, run_scaling},
  };
  return all;
}

}  // namespace ocp::cli
