#include "ocp/graphical.hpp"

#include <algorithm>
#include <cmath>

#include "ocp/errors.hpp"
#include "ocp/random.hpp"

namespace ocp {

namespace {

// Marks of a rate-`rate` Poisson process restricted to block k = [k*w, (k+1)*w)
// are generated by exponential gaps from the block start. Disjoint blocks use
// independent streams, which gives a Poisson process on [0, inf).
template <bool WithUniform>
ArrowMark next_mark(std::uint64_t seed, Domain domain, std::uint64_t site, int axis, double rate, double block,
                    double after, double horizon) {
  const double start = std::max(after, 0.0);
  auto k = static_cast<std::uint64_t>(std::floor(start / block));
  for (;; ++k) {
    const double lo = static_cast<double>(k) * block;
    if (lo > horizon) return {};
    const double hi = static_cast<double>(k + 1) * block;
    SplitMix64 stream(KeyedHash(seed, domain).add(site).add(static_cast<std::uint64_t>(axis)).add(k).digest());
    double t = lo;
    for (;;) {
      t += to_exponential(stream(), rate);
      if (t >= hi) break;
      const double u = WithUniform ? to_unit(stream()) : 0.0;
      if (t > after) {
        if (t > horizon) return {};
        return {t, u};
      }
    }
  }
}

}  // namespace

HarrisMarks::HarrisMarks(std::uint64_t seed, double arrow_rate)
    : seed_(seed), arrow_rate_(arrow_rate), arrow_block_(1.0 / std::max(arrow_rate, 1.0)) {
  require(arrow_rate > 0.0 && std::isfinite(arrow_rate), "arrow rate must be positive and finite");
}

double HarrisMarks::next_recovery(std::uint64_t site, double after, double horizon) const noexcept {
  const ArrowMark m = next_mark<false>(seed_, Domain::recovery_mark, site, 0, 1.0, 1.0, after, horizon);
  return m.time;
}

ArrowMark HarrisMarks::next_arrow(std::uint64_t site, int axis, double after, double horizon) const noexcept {
  return next_mark<true>(seed_, Domain::arrow_mark, site, axis, arrow_rate_, arrow_block_, after, horizon);
}

}  // namespace ocp
