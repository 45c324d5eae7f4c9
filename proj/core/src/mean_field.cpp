#include "ocp/mean_field.hpp"

#include <cmath>

#include "ocp/errors.hpp"

namespace ocp {

double solve_closed_form(double a, double t) {
  require(a > 0.0 && std::isfinite(a), "a must be positive and finite");
  require(t >= 0.0, "t must be nonnegative");
  const double r = a - 1.0;
  // (1 - e^{-rt}) / r, evaluated stably near r = 0 and for large |rt|.
  const double growth = r == 0.0 ? t : -std::expm1(-r * t) / r;
  // 1/f solves u' = a - r u, so u = e^{-rt} + a growth = 1 + growth.
  return 1.0 / (1.0 + growth);
}

namespace {

double rk4_from(double a, double f, double t, double step) {
  const auto full = static_cast<long long>(std::floor(t / step));
  auto advance = [a](double y, double h) {
    const double k1 = mean_field_rhs(a, y);
    const double k2 = mean_field_rhs(a, y + 0.5 * h * k1);
    const double k3 = mean_field_rhs(a, y + 0.5 * h * k2);
    const double k4 = mean_field_rhs(a, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  for (long long i = 0; i < full; ++i) f = advance(f, step);
  const double rest = t - static_cast<double>(full) * step;
  if (rest > 0.0) f = advance(f, rest);
  return f;
}

}  // namespace

double integrate_numeric(double a, double t, double step) {
  require(a > 0.0 && std::isfinite(a), "a must be positive and finite");
  require(t >= 0.0, "t must be nonnegative");
  require(step > 0.0, "step must be positive");
  return rk4_from(a, 1.0, t, step);
}

std::vector<MeanFieldState> trajectory(double a, double t_max, double dt, bool numeric, double step) {
  require(t_max >= 0.0, "t_max must be nonnegative");
  require(dt > 0.0, "dt must be positive");
  require(step > 0.0, "step must be positive");
  solve_closed_form(a, 0.0);
  std::vector<MeanFieldState> out;
  const auto n = static_cast<long long>(std::floor(t_max / dt + 1e-9));
  double f = 1.0;
  double t_prev = 0.0;
  for (long long i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (numeric) {
      if (i > 0) f = rk4_from(a, f, t - t_prev, step);
    } else {
      f = solve_closed_form(a, t);
    }
    out.push_back({a, t, f});
    t_prev = t;
  }
  return out;
}

double mean_field_limit(double a) {
  require(a > 0.0, "a must be positive");
  return a > 1.0 ? (a - 1.0) / a : 0.0;
}

}  // namespace ocp
