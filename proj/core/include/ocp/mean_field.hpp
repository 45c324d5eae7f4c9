#pragma once

#include <vector>

namespace ocp {

/// f' = (a - 1) f - a f^2 with f(0) = 1; a stands for lambda d p.
struct MeanFieldState {
  double a = 1.0;
  double t = 0.0;
  double f = 1.0;
};

/// Exact solution 1 / (1 + (1 - e^{-r t}) / r) with r = a - 1, which is
/// 1 / (1 + t) at a = 1.
double solve_closed_form(double a, double t);

/// Classical RK4 with the given step; the last step is shortened to land on t.
double integrate_numeric(double a, double t, double step);

/// States at t = 0, dt, 2 dt, ... up to t_max (inclusive when it falls on the
/// grid), from the closed form or from RK4 with `step`.
std::vector<MeanFieldState> trajectory(double a, double t_max, double dt, bool numeric = false, double step = 1e-3);

/// Right-hand side (a - 1) f - a f^2.
constexpr double mean_field_rhs(double a, double f) noexcept { return (a - 1.0) * f - a * f * f; }

/// (a - 1) / a for a > 1, else 0.
double mean_field_limit(double a);

}  // namespace ocp
