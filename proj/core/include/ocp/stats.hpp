#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace ocp {

/// Sample mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error (unbiased variance) of the samples, summed in order.
Estimate estimate_from(std::span<const double> samples);

/// Binomial proportion successes / trials with the plug-in standard error.
Estimate proportion(std::size_t successes, std::size_t trials);

inline double combined_se(const Estimate& a, const Estimate& b) noexcept {
  return std::hypot(a.se, b.se);
}

/// |a - b| <= k * combined standard error.
inline bool agree_within(const Estimate& a, const Estimate& b, double k) noexcept {
  return std::abs(a.mean - b.mean) <= k * combined_se(a, b);
}

/// |e - value| <= k * e.se.
inline bool within_se(const Estimate& e, double value, double k) noexcept {
  return std::abs(e.mean - value) <= k * e.se;
}

}  // namespace ocp
