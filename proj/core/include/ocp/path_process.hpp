#pragma once

// Binary contact path process: zeta(x) resets to 0 at rate 1 and, for each open
// y -> x, becomes zeta(x) + zeta(y) at rate lambda. Started from zeta = 1, its
// support is the contact process started from everything infected, and its
// annealed mean at the origin is exp((lambda d p - 1) t).

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ocp/contact.hpp"
#include "ocp/environment.hpp"
#include "ocp/stats.hpp"

namespace ocp {

struct PathProcessConfiguration {
  std::vector<std::pair<Vertex, std::uint64_t>> values;  // sorted by vertex, every simulated site
  double time = 0.0;
  /// Some counter saturated at 2^64 - 1.
  bool overflow = false;

  std::uint64_t at(const Vertex& v) const;
};

/// Simulates zeta on the whole box [-L, L]^d from zeta_0 = 1 up to opts.horizon.
/// Only edges with both endpoints in the box carry arrows.
PathProcessConfiguration run_path_process(const QuenchedEnvironment& env, double lambda, const SimOptions& opts);

/// Support of zeta as a contact configuration.
ContactConfiguration coupled_eta_view(const PathProcessConfiguration& zeta);

struct JointPathRun {
  PathProcessConfiguration zeta;
  ContactConfiguration eta;
  std::uint64_t events = 0;
};

/// Runs zeta together with the contact process built from the same marks and
/// checks eta(x) = 1 <=> zeta(x) >= 1 after every event (std::logic_error otherwise).
JointPathRun run_joint_path_contact(const QuenchedEnvironment& env, double lambda, const SimOptions& opts);

struct ZetaMeanEstimate {
  Estimate mean;
  double analytic = 0.0;
  std::size_t replicas = 0;
  std::size_t overflow_discards = 0;
  /// More than 0.1% of replicas discarded for overflow.
  bool overflow_warning = false;
  int depth = 0;
  /// Relative downward bias from dropping paths longer than `depth`.
  double truncation_tail = 0.0;
};

/// Annealed mean of zeta_t(0). Only the backward cone {-v : v >= 0, |v|_1 <= L}
/// with L = opts.box_radius can reach the origin through paths of length <= L,
/// so only that cone is simulated.
ZetaMeanEstimate mean_zeta_origin(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts);

/// Annealed probability that the origin has zeta_t(0) >= 1 (the coupled eta).
Estimate zeta_support_origin(const ModelParams& params, double t, std::size_t replicas, const SimOptions& opts);

/// exp((lambda d p - 1) t).
double analytic_mean_zeta(const ModelParams& params, double t);

/// e^{-t} sum_{n <= terms} (t lambda d p)^n / n!.
double analytic_mean_zeta_series(const ModelParams& params, double t, int terms);

/// P(N > depth) for N ~ Poisson(mean).
double poisson_upper_tail(double mean, int depth);

/// Smallest depth whose dropped-path share of E zeta_t(0) is at most rel_tol.
int zeta_truncation_depth(const ModelParams& params, double t, double rel_tol = 1e-4);

}  // namespace ocp
