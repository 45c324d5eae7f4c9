#include "ocp/stats.hpp"

namespace ocp {

Estimate estimate_from(std::span<const double> samples) {
  Estimate e;
  e.n = samples.size();
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double x : samples) sum += x;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double x : samples) ss += (x - e.mean) * (x - e.mean);
  e.se = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
  return e;
}

Estimate proportion(std::size_t successes, std::size_t trials) {
  Estimate e;
  e.n = trials;
  if (trials == 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(trials);
  e.se = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  return e;
}

}  // namespace ocp
