#include <doctest.h>

#include <cmath>

#include "ocp/contact.hpp"
#include "ocp/errors.hpp"
#include "ocp/random.hpp"
#include "ocp/sir.hpp"
#include "sir_exact.hpp"

using namespace ocp;

namespace {

InfectionTrialField fresh_field(const ModelParams& params, double lambda, std::uint64_t seed, std::uint64_t i) {
  return InfectionTrialField(QuenchedEnvironment(params, seed_schedule(seed, "env", i)), lambda,
                             seed_schedule(seed, "trial", i));
}

struct AllInfect {
  bool infects_axis(std::span<const std::int64_t>, int) const noexcept { return true; }
};

oracle::Path zero_based(const OrientedPath& p) {
  oracle::Path out;
  for (int s : p.steps) out.push_back(s - 1);
  return out;
}

}  // namespace

TEST_CASE("single and pair infection frequencies") {
  struct Case {
    double lambda, p;
  };
  for (const Case c : {Case{1.0, 0.5}, Case{2.0, 0.3}}) {
    const ModelParams params{2, c.p, std::nullopt};
    std::size_t one = 0, two = 0;
    const std::size_t trials = 1000000;
    for (std::uint64_t i = 0; i < trials; ++i) {
      const auto f = fresh_field(params, c.lambda, 30, i);
      const bool a = f.infects(Vertex{0, 0}, 1);
      const bool b = f.infects(Vertex{0, 0}, 2);
      one += a;
      two += a && b;
    }
    CAPTURE(c.lambda);
    CHECK(within_se(proportion(one, trials), single_infection_probability(c.lambda, c.p), 3.0));
    CHECK(within_se(proportion(two, trials), pair_infection_probability(c.lambda, c.p), 3.0));
  }
  CHECK(single_infection_probability(1.0, 0.5) == doctest::Approx(0.25));
  CHECK(pair_infection_probability(1.0, 0.5) == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("infection is a fixed function of the field") {
  const auto f = fresh_field(ModelParams{3, 0.6, std::nullopt}, 1.3, 31, 0);
  const auto g = fresh_field(ModelParams{3, 0.6, std::nullopt}, 1.3, 31, 0);
  for (std::int64_t x = -3; x <= 3; ++x)
    for (int dir = 1; dir <= 3; ++dir) {
      const Vertex v{x, 2 * x, -x};
      CHECK(f.infects(v, dir) == g.infects(v, dir));
      CHECK(f.infects(v, dir) == f.infects(v, dir));
      const bool expected = f.environment().is_open(v.coords(), dir - 1) &&
                            f.attempt_clock(v.coords(), dir - 1) <= f.recovery_clock(v.coords());
      CHECK(f.infects(v, dir) == expected);
    }
  CHECK_THROWS_AS((void)f.infects(Vertex{0, 0, 0}, 0), ContractViolation);
  CHECK_THROWS_AS((void)f.infects(Vertex{0, 0, 0}, 4), ContractViolation);
}

TEST_CASE("a huge rate on an all-open lattice always infects") {
  const auto open = QuenchedEnvironment::all_open(ModelParams{2, 0.5, std::nullopt});
  std::size_t hits = 0;
  for (std::uint64_t i = 0; i < 10000; ++i)
    hits += InfectionTrialField(open, 1e12, seed_schedule(32, "trial", i)).infects(Vertex{0, 0}, 1);
  CHECK(hits == 10000);
}

TEST_CASE("path counts") {
  CHECK(count_infection_paths(AllInfect{}, 2, 10) == 1024);
  CHECK(count_infection_paths(AllInfect{}, 3, 7) == 2187);
  const auto levels = infection_path_level_counts(AllInfect{}, 4, 5);
  CHECK(levels == std::vector<std::uint64_t>{1, 4, 16, 64, 256, 1024});
  CHECK_THROWS_AS(count_infection_paths(AllInfect{}, 10, 8), BudgetExceeded);

  const ModelParams params{2, 0.5, std::nullopt};
  std::vector<double> m1, m3;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto f = fresh_field(params, 1.0, 33, i);
    const auto levels2 = infection_path_level_counts(f, 2, 3);
    CHECK(levels2[1] <= 2);
    m1.push_back(static_cast<double>(levels2[1]));
    m3.push_back(static_cast<double>(levels2[3]));
  }
  CHECK(within_se(estimate_from(m1), 2 * 0.25, 3.0));
  CHECK(within_se(estimate_from(m3), 0.125, 3.0));
}

TEST_CASE("path overlaps") {
  const OrientedPath a{{1, 1, 2}}, b{{1, 2, 2}}, c{{2, 1, 1}};
  CHECK(path_overlap(a, a).shared_steps == 3);
  CHECK(path_overlap(a, a).split_steps == 0);
  CHECK(path_overlap(a, b).shared_steps == 1);
  CHECK(path_overlap(a, b).split_steps == 1);
  CHECK(path_overlap(a, c).shared_steps == 0);
  CHECK(path_overlap(a, c).split_steps == 1);
  // Paths that separate and meet again: (1,2) and (2,1) both reach (1,1).
  const OrientedPath e{{1, 2, 1}}, f{{2, 1, 1}};
  CHECK(path_overlap(e, f).shared_steps == 1);
  CHECK(path_overlap(e, f).split_steps == 1);
  CHECK(all_paths(2, 3).size() == 8);
  CHECK(all_paths(3, 0).size() == 1);
}

TEST_CASE("pair correlations against the vertex-factor oracle") {
  for (int d : {2, 3}) {
    for (int n = 1; n <= 3; ++n) {
      const ModelParams params{d, 0.5, 1.0};
      for (const auto& a : all_paths(d, n))
        for (const auto& b : all_paths(d, n)) {
          const double exact = oracle::joint_probability(d, {zero_based(a), zero_based(b)}, 1.0, 0.5);
          CHECK(std::abs(theoretical_pair_correlation(params, a, b) - exact) < 1e-12);
        }
      CHECK(std::abs(exact_second_moment(params, n) - oracle::second_moment(d, n, 1.0, 0.5)) < 1e-12);
    }
  }
  const ModelParams params{2, 0.5, 1.0};
  const OrientedPath a{{1}};
  CHECK(theoretical_pair_correlation(params, a, a) == doctest::Approx(0.25));
  CHECK(theoretical_pair_correlation(params, OrientedPath{{1, 1}}, OrientedPath{{2, 2}}) ==
        doctest::Approx(1.0 / 192.0));
}

TEST_CASE("split-then-disjoint pair by direct simulation") {
  const ModelParams params{2, 0.5, std::nullopt};
  std::size_t both = 0;
  const std::size_t trials = 10000000;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto f = fresh_field(params, 1.0, 34, i);
    both += f.infects(Vertex{0, 0}, 1) && f.infects(Vertex{0, 0}, 2) && f.infects(Vertex{1, 0}, 1) &&
            f.infects(Vertex{0, 1}, 2);
  }
  CHECK(within_se(proportion(both, trials), 1.0 / 192.0, 3.0));
}

TEST_CASE("second moment bound at d=2, n=2") {
  const ModelParams params{2, 0.5, 1.0};
  const double first = 4 * 0.25 * 0.25;
  const double second = oracle::second_moment(2, 2, 1.0, 0.5);
  const double survival = oracle::survival(2, 2, 1.0, 0.5);
  const auto r = second_moment_bound(params, 2, 400000, 35);
  CAPTURE(second);
  CAPTURE(survival);
  CHECK(within_se(r.first, first, 3.0));
  CHECK(within_se(r.second, second, 3.0));
  CHECK(within_se(r.direct, survival, 3.0));
  CHECK(r.direct.mean >= r.bound - 3 * std::hypot(r.direct.se, r.bound_se));
  CHECK(r.bound >= 0.0);
  CHECK(r.bound <= 1.0);
  CHECK(first * first / second <= survival);
}

TEST_CASE("the bound is tight in one dimension") {
  for (int n : {1, 3}) {
    const auto r = second_moment_bound(ModelParams{1, 0.7, 1.5}, n, 20000, 36);
    CHECK(r.bound == doctest::Approx(r.direct.mean).epsilon(1e-12));
    CHECK(within_se(r.direct, std::pow(single_infection_probability(1.5, 0.7), n), 3.0));
  }
}

TEST_CASE("survival of infection paths decreases in the depth") {
  const auto curve = infection_path_survival_curve(ModelParams{3, 0.9, 2.0}, 10, 5000, 37);
  REQUIRE(curve.size() == 11);
  CHECK(curve[0].mean == 1.0);
  for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k].mean <= curve[k - 1].mean);
}

TEST_CASE("infection paths are dominated by contact survival") {
  const ModelParams params{3, 0.9, 2.0};
  const auto curve = infection_path_survival_curve(params, 14, 4000, 38);
  SimOptions o;
  o.horizon = 30.0;
  o.box_radius = 40;
  o.population_cap = 1000;
  o.rng_seed = 39;
  const Estimate contact = survival_probability(params, o, 1000, SurvivalMode::annealed()).survival;
  MESSAGE("P(C_14 nonempty) " << curve.back().mean << " vs contact survival " << contact.mean);
  CHECK(curve.back().mean <= contact.mean + 3 * combined_se(curve.back(), contact));
}

TEST_CASE("mean open path count") {
  for (int n = 1; n <= 4; ++n) {
    const Estimate e = mean_open_path_count(ModelParams{2, 0.5, std::nullopt}, n, 10000, 40);
    CHECK(within_se(e, 1.0, 3.0));
  }
}
