#include <benchmark/benchmark.h>

#include "ocp/contact.hpp"
#include "ocp/environment.hpp"
#include "ocp/path_process.hpp"
#include "ocp/random.hpp"
#include "ocp/sir.hpp"
#include "ocp/walk_pair.hpp"

using namespace ocp;

static void BM_EdgeState(benchmark::State& state) {
  const QuenchedEnvironment env(ModelParams{4, 0.5, std::nullopt}, 7);
  std::int64_t x[4] = {0, 0, 0, 0};
  std::uint64_t open = 0;
  for (auto _ : state) {
    ++x[0];
    for (int axis = 0; axis < 4; ++axis) open += env.is_open(x, axis);
  }
  benchmark::DoNotOptimize(open);
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_EdgeState);

static void BM_ContactRun(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Vertex origin = Vertex::origin(d);
  SimOptions opts;
  opts.horizon = 30.0;
  opts.box_radius = 40;
  opts.population_cap = 5000;
  std::uint64_t i = 0, events = 0;
  for (auto _ : state) {
    const QuenchedEnvironment env(ModelParams{d, 0.5, std::nullopt}, seed_schedule(1, "env", i));
    opts.rng_seed = seed_schedule(1, "run", i++);
    events += run_quenched(env, 1.5 / (d * 0.5), std::span(&origin, 1), opts).events;
  }
  state.counters["events/run"] = benchmark::Counter(static_cast<double>(events) / static_cast<double>(i));
}
BENCHMARK(BM_ContactRun)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_CoupledLayers(benchmark::State& state) {
  const auto layers = static_cast<std::size_t>(state.range(0));
  std::vector<double> lambdas;
  for (std::size_t k = 1; k <= layers; ++k) lambdas.push_back(0.5 + 0.5 * static_cast<double>(k) / layers);
  const Vertex origin = Vertex::origin(4);
  SimOptions opts;
  opts.horizon = 30.0;
  opts.box_radius = 40;
  opts.population_cap = 5000;
  std::uint64_t i = 0;
  for (auto _ : state) {
    const QuenchedEnvironment env(ModelParams{4, 0.5, std::nullopt}, seed_schedule(2, "env", i));
    opts.rng_seed = seed_schedule(2, "run", i++);
    benchmark::DoNotOptimize(run_coupled(env, lambdas, 1.0, std::span(&origin, 1), opts));
  }
}
BENCHMARK(BM_CoupledLayers)->Arg(1)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_ZetaMean(benchmark::State& state) {
  const ModelParams params{3, 0.5, 2.0 / 3.0};
  SimOptions opts;
  opts.box_radius = zeta_truncation_depth(params, 1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    opts.rng_seed = ++seed;
    benchmark::DoNotOptimize(mean_zeta_origin(params, 1.0, 1000, opts));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_ZetaMean)->Unit(benchmark::kMillisecond);

static void BM_WalkPair(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_pair(d, 1600, ++seed));
  state.SetItemsProcessed(state.iterations() * 1600);
}
BENCHMARK(BM_WalkPair)->Arg(2)->Arg(6);

static void BM_InfectionPaths(benchmark::State& state) {
  const ModelParams params{3, 0.9, std::nullopt};
  std::uint64_t i = 0;
  for (auto _ : state) {
    const InfectionTrialField f(QuenchedEnvironment(params, seed_schedule(3, "env", i)), 2.0,
                                seed_schedule(3, "trial", i));
    ++i;
    benchmark::DoNotOptimize(count_infection_paths(f, 3, 12));
  }
}
BENCHMARK(BM_InfectionPaths)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
