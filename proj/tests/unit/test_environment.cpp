#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "ocp/environment.hpp"
#include "ocp/errors.hpp"
#include "ocp/random.hpp"
#include "ocp/stats.hpp"

using namespace ocp;

namespace {

Vertex random_vertex(SplitMix64& rng, int d, int spread = 1000) {
  std::vector<std::int64_t> x(static_cast<std::size_t>(d));
  for (auto& c : x) c = static_cast<std::int64_t>(to_index(rng(), 2 * spread + 1)) - spread;
  return Vertex(std::move(x));
}

DirectedEdge random_edge(SplitMix64& rng, int d) {
  return {random_vertex(rng, d), static_cast<int>(to_index(rng(), static_cast<std::uint32_t>(d))) + 1};
}

// l_n by plain enumeration of step sequences through the checked API.
std::uint64_t brute_force_paths(const QuenchedEnvironment& env, int n) {
  const int d = env.dim();
  std::uint64_t total = 0;
  std::vector<int> steps(static_cast<std::size_t>(n), 1);
  for (;;) {
    Vertex x = Vertex::origin(d);
    for (int s : steps) x = x - Vertex::unit(d, s);
    bool open = true;
    for (int s : steps) {
      open = open && env.edge_state({x, s});
      x = x + Vertex::unit(d, s);
    }
    total += open ? 1 : 0;
    int i = n - 1;
    while (i >= 0 && steps[static_cast<std::size_t>(i)] == d) steps[static_cast<std::size_t>(i--)] = 1;
    if (i < 0) break;
    ++steps[static_cast<std::size_t>(i)];
  }
  return total;
}

}  // namespace

TEST_CASE("edge states are replayable and seed dependent") {
  const ModelParams params{3, 0.5, std::nullopt};
  const QuenchedEnvironment a(params, 17), b(params, 17), c(params, 18);
  SplitMix64 rng(1);
  int differ = 0;
  for (int i = 0; i < 2000; ++i) {
    const DirectedEdge e = random_edge(rng, 3);
    CHECK(a.edge_state(e) == b.edge_state(e));
    differ += a.edge_state(e) != c.edge_state(e) ? 1 : 0;
  }
  CHECK(differ > 800);
}

TEST_CASE("open fraction matches p") {
  for (double p : {0.2, 0.5, 0.7}) {
    const QuenchedEnvironment env(ModelParams{2, p, std::nullopt}, 5);
    SplitMix64 rng(2);
    std::size_t open = 0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) open += env.edge_state(random_edge(rng, 2)) ? 1 : 0;
    CHECK(within_se(proportion(open, n), p, 3.0));
  }
}

TEST_CASE("checked queries reject mismatched edges") {
  const QuenchedEnvironment env(ModelParams{2, 0.5, std::nullopt}, 1);
  CHECK_THROWS_AS(env.edge_state({Vertex{0, 0, 0}, 1}), ContractViolation);
  CHECK_THROWS_AS(env.edge_state({Vertex{0, 0}, 0}), ContractViolation);
  CHECK_THROWS_AS(env.edge_state({Vertex{0, 0}, 3}), ContractViolation);
  CHECK_THROWS_AS(env.translate(Vertex{1}), ContractViolation);
  CHECK_THROWS_AS(env.open_in_neighbors(Vertex{1, 2, 3}), ContractViolation);
  CHECK_THROWS_AS(QuenchedEnvironment(ModelParams{2, 1.5, std::nullopt}, 1), ContractViolation);
  CHECK_THROWS_AS(QuenchedEnvironment(ModelParams{0, 0.5, std::nullopt}, 1), ContractViolation);
}

TEST_CASE("translation") {
  const QuenchedEnvironment env(ModelParams{3, 0.5, std::nullopt}, 99);
  SplitMix64 rng(4);
  const Vertex x = random_vertex(rng, 3);
  const QuenchedEnvironment shifted = env.translate(x);
  const QuenchedEnvironment identity = env.translate(Vertex::origin(3));
  const QuenchedEnvironment back = shifted.translate(-x);
  for (int i = 0; i < 1000; ++i) {
    const DirectedEdge e = random_edge(rng, 3);
    CHECK(shifted.edge_state(e) == env.edge_state({x + e.from, e.direction}));
    CHECK(identity.edge_state(e) == env.edge_state(e));
    CHECK(back.edge_state(e) == env.edge_state(e));
  }
}

TEST_CASE("translation preserves the open fraction") {
  const QuenchedEnvironment env(ModelParams{2, 0.3, std::nullopt}, 7);
  const QuenchedEnvironment shifted = env.translate(Vertex{123456, -98765});
  SplitMix64 rng(8);
  std::size_t a = 0, b = 0;
  const std::size_t n = 50000;
  for (std::size_t i = 0; i < n; ++i) {
    const DirectedEdge e = random_edge(rng, 2);
    a += env.edge_state(e) ? 1 : 0;
    b += shifted.edge_state(random_edge(rng, 2)) ? 1 : 0;
  }
  CHECK(agree_within(proportion(a, n), proportion(b, n), 3.0));
}

TEST_CASE("in-neighbors") {
  const ModelParams line{1, 0.5, std::nullopt};
  CHECK(QuenchedEnvironment::all_closed(line).open_in_neighbors(Vertex{5}).empty());

  const QuenchedEnvironment env(ModelParams{4, 0.5, std::nullopt}, 11);
  SplitMix64 rng(12);
  std::vector<double> sizes;
  for (int i = 0; i < 40000; ++i) {
    const Vertex x = random_vertex(rng, 4);
    const auto in = env.open_in_neighbors(x);
    sizes.push_back(static_cast<double>(in.size()));
    CHECK(in.size() <= 4);
    for (const Vertex& y : in) {
      const Vertex diff = x - y;
      int ones = 0, zeros = 0;
      for (auto c : diff.coords()) ones += c == 1, zeros += c == 0;
      CHECK(ones == 1);
      CHECK(zeros == 3);
      int axis = 0;
      while (diff[static_cast<std::size_t>(axis)] != 1) ++axis;
      CHECK(env.edge_state({y, axis + 1}));
    }
  }
  CHECK(within_se(estimate_from(sizes), 2.0, 3.0));
}

TEST_CASE("out-neighbor counts follow Binomial(d, p)") {
  const int d = 4;
  const double p = 0.5;
  const QuenchedEnvironment env(ModelParams{d, p, std::nullopt}, 21);
  SplitMix64 rng(22);
  const std::size_t n = 100000;
  std::vector<double> counts(d + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) ++counts[env.open_out_neighbors(random_vertex(rng, d)).size()];
  double chi2 = 0.0, binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    const double expected = n * binom * std::pow(p, k) * std::pow(1 - p, d - k);
    chi2 += (counts[static_cast<std::size_t>(k)] - expected) * (counts[static_cast<std::size_t>(k)] - expected) / expected;
    binom = binom * (d - k) / (k + 1);
  }
  CHECK(chi2 < 18.47);  // 0.999 quantile of chi-square with 4 degrees of freedom
}

TEST_CASE("out-neighbors in one dimension") {
  const ModelParams line{1, 0.5, std::nullopt};
  const auto open = QuenchedEnvironment::all_open(line);
  CHECK(open.open_out_neighbors(Vertex{3}) == std::vector<Vertex>{Vertex{4}});
  const QuenchedEnvironment env(line, 5);
  for (std::int64_t x = -50; x < 50; ++x) {
    const auto in = env.open_in_neighbors(Vertex{x});
    const auto out = env.open_out_neighbors(Vertex{x});
    for (const auto& v : in) CHECK(std::find(out.begin(), out.end(), v) == out.end());
  }
}

TEST_CASE("open path counts") {
  const QuenchedEnvironment env(ModelParams{2, 0.5, std::nullopt}, 3);
  CHECK(count_open_paths_to_origin(env, 0) == 1);
  for (int d : {1, 2, 3}) {
    const auto all = QuenchedEnvironment::all_open(ModelParams{d, 0.5, std::nullopt});
    for (int n = 0; n <= 6; ++n) CHECK(count_open_paths_to_origin(all, n) == static_cast<std::uint64_t>(std::pow(d, n)));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const QuenchedEnvironment e(ModelParams{3, 0.6, std::nullopt}, seed);
    for (int n = 0; n <= 5; ++n) CHECK(count_open_paths_to_origin(e, n) == brute_force_paths(e, n));
  }
  CHECK_THROWS_AS(count_open_paths_to_origin(QuenchedEnvironment(ModelParams{10, 0.5, std::nullopt}, 1), 8),
                  BudgetExceeded);
}

TEST_CASE("mean open path count is (dp)^n") {
  struct Case {
    int d;
    double p;
    int n;
  };
  for (const Case c : {Case{2, 0.5, 3}, Case{2, 0.7, 4}, Case{3, 0.4, 3}, Case{1, 0.8, 5}}) {
    std::vector<double> counts;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const QuenchedEnvironment e(ModelParams{c.d, c.p, std::nullopt}, seed_schedule(77, "env", i));
      counts.push_back(static_cast<double>(count_open_paths_to_origin(e, c.n)));
    }
    CAPTURE(c.d);
    CAPTURE(c.n);
    CHECK(within_se(estimate_from(counts), std::pow(c.d * c.p, c.n), 3.0));
  }
}

TEST_CASE("environment JSON round trip") {
  const QuenchedEnvironment env(ModelParams{3, 0.25, std::nullopt}, 0xDEADBEEFCAFEULL, Vertex{1, -2, 3});
  const nlohmann::json j = env.to_json();
  CHECK(j.at("env_seed").get<std::uint64_t>() == 0xDEADBEEFCAFEULL);
  const QuenchedEnvironment back = QuenchedEnvironment::from_json(nlohmann::json::parse(j.dump()));
  SplitMix64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const DirectedEdge e = random_edge(rng, 3);
    CHECK(back.edge_state(e) == env.edge_state(e));
  }
}
