#include <doctest.h>

#include <cmath>

#include "ocp/path_process.hpp"
#include "ocp/random.hpp"
#include "ode.hpp"

using namespace ocp;

TEST_CASE("without edges every site is a death chain") {
  const auto env = QuenchedEnvironment::all_closed(ModelParams{2, 0.5, std::nullopt});
  SimOptions o;
  o.horizon = 1.0;
  o.box_radius = 2;
  std::size_t ones = 0, runs = 20000, sites = 0;
  for (std::uint64_t i = 0; i < runs; ++i) {
    o.rng_seed = seed_schedule(20, "death", i);
    const auto z = run_path_process(env, 1.5, o);
    sites = z.values.size();
    for (const auto& [v, value] : z.values) {
      CHECK(value <= 1);
      ones += value;
    }
  }
  CHECK(sites == 25);
  CHECK(within_se(proportion(ones, runs * sites), std::exp(-1.0), 3.0));
}

TEST_CASE("a single open edge follows the linear ODE") {
  const ModelParams line{1, 0.5, std::nullopt};
  const auto env = QuenchedEnvironment::with_override(
      line, [](std::span<const std::int64_t> from, int) { return from[0] == 0; });
  const double lambda = 1.5, t = 1.0;
  const double exact =
      oracle::rk4([lambda](double s, double m) { return -m + lambda * std::exp(-s); }, 0.0, 1.0, t, 10000);
  CHECK(exact == doctest::Approx(std::exp(-t) * (1 + lambda * t)).epsilon(1e-10));

  SimOptions o;
  o.horizon = t;
  o.box_radius = 1;
  std::vector<double> b;
  for (std::uint64_t i = 0; i < 200000; ++i) {
    o.rng_seed = seed_schedule(21, "edge", i);
    b.push_back(static_cast<double>(run_path_process(env, lambda, o).at(Vertex{1})));
  }
  CHECK(within_se(estimate_from(b), exact, 3.0));
}

TEST_CASE("the coupled support matches an independent contact process") {
  SimOptions o;
  o.box_radius = 10;
  o.rng_seed = 22;
  const ModelParams params{2, 0.7, 1.0};
  const Estimate zeta = zeta_support_origin(params, 1.0, 20000, o);
  o.rng_seed = 23;
  const Estimate eta = annealed_occupation(params, 1.0, Vertex::origin(2), 20000, o);
  MESSAGE("support " << zeta.mean << " vs contact " << eta.mean);
  CHECK(std::abs(zeta.mean - eta.mean) <= 3 * combined_se(zeta, eta));
}

TEST_CASE("support view") {
  PathProcessConfiguration z;
  z.values = {{Vertex{-1, 0}, 0}, {Vertex{0, 0}, 0}};
  CHECK(coupled_eta_view(z).infected.empty());
  z.values[1].second = 7;
  const auto eta = coupled_eta_view(z);
  REQUIRE(eta.size() == 1);
  CHECK(eta.infected[0] == Vertex{0, 0});

  const QuenchedEnvironment env(ModelParams{2, 0.8, std::nullopt}, 24);
  SimOptions o;
  o.horizon = 2.0;
  o.box_radius = 5;
  for (std::uint64_t i = 0; i < 50; ++i) {
    o.rng_seed = seed_schedule(24, "view", i);
    const auto r = run_path_process(env, 1.0, o);
    std::size_t nonzero = 0;
    for (const auto& [v, value] : r.values) nonzero += value > 0 ? 1 : 0;
    CHECK(coupled_eta_view(r).size() == nonzero);
  }
}

TEST_CASE("joint runs keep support and contact process equal") {
  SimOptions o;
  o.horizon = 3.0;
  o.box_radius = 6;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const QuenchedEnvironment env(ModelParams{2, 0.7, std::nullopt}, seed_schedule(25, "env", i));
    o.rng_seed = seed_schedule(25, "joint", i);
    JointPathRun r;
    CHECK_NOTHROW(r = run_joint_path_contact(env, 1.2, o));
    CHECK(coupled_eta_view(r.zeta).infected == r.eta.infected);
  }
}

TEST_CASE("annealed mean of zeta at the origin") {
  SimOptions o;
  o.rng_seed = 26;
  const ModelParams critical{3, 0.5, 2.0 / 3.0};
  for (double t : {0.5, 1.0, 2.0}) {
    o.box_radius = zeta_truncation_depth(critical, t);
    const auto z = mean_zeta_origin(critical, t, 20000, o);
    CAPTURE(t);
    CHECK(z.analytic == doctest::Approx(1.0));
    CHECK(within_se(z.mean, 1.0, 3.0));
    CHECK_FALSE(z.overflow_warning);
    CHECK(z.truncation_tail <= 1e-4);
  }
  const ModelParams sub{3, 0.5, 0.4 / 1.5};
  o.box_radius = zeta_truncation_depth(sub, 2.0);
  const auto z = mean_zeta_origin(sub, 2.0, 20000, o);
  CHECK(z.analytic == doctest::Approx(0.3012).epsilon(1e-3));
  CHECK(within_se(z.mean, std::exp(-1.2), 3.0));

  const auto zero = mean_zeta_origin(critical, 0.0, 10, o);
  CHECK(zero.mean.mean == 1.0);
  CHECK(zero.mean.se == 0.0);
}

TEST_CASE("analytic mean and its series") {
  CHECK(analytic_mean_zeta(ModelParams{4, 0.25, 1.0}, 3.7) == 1.0);
  for (double t : {0.1, 1.0, 2.5, 5.0})
    for (double ldp : {0.3, 1.0, 1.0 / 0.5 / 3.0 * 2.0}) {
      if (t * ldp > 5.0) continue;
      const ModelParams params{2, 0.5, ldp};
      CHECK(std::abs(analytic_mean_zeta_series(params, t, 50) - analytic_mean_zeta(params, t)) < 1e-12);
    }
  const ModelParams sub{3, 0.5, 0.5};
  double last = 1.0;
  for (double t = 1.0; t <= 64.0; t *= 2) {
    const double m = analytic_mean_zeta(sub, t);
    CHECK(m < last);
    last = m;
  }
  CHECK(last < 1e-6);
}

TEST_CASE("truncation depth controls the dropped mass") {
  const ModelParams params{3, 0.5, 2.0};
  for (double t : {0.5, 1.0, 2.0}) {
    const int depth = zeta_truncation_depth(params, t, 1e-4);
    const double mean = t * params.lambda.value() * 3 * 0.5;
    CHECK(poisson_upper_tail(mean, depth) <= 1e-4);
    CHECK(poisson_upper_tail(mean, depth - 1) > 1e-4);
  }
  CHECK(poisson_upper_tail(1.0, 0) == doctest::Approx(1 - std::exp(-1.0)));
}

TEST_CASE("occupation is bounded by the mean of zeta") {
  SimOptions o;
  o.rng_seed = 27;
  for (double lambda : {0.5, 1.0, 2.0}) {
    const ModelParams params{2, 0.6, lambda};
    o.box_radius = zeta_truncation_depth(params, 1.0);
    const Estimate support = zeta_support_origin(params, 1.0, 10000, o);
    const Estimate mean = mean_zeta_origin(params, 1.0, 10000, o).mean;
    CAPTURE(lambda);
    CHECK(support.mean <= mean.mean + 3 * combined_se(support, mean));
  }
}
