#pragma once

// Harris-style graphical representation with lazily generated marks.
//
// Every site carries a rate-1 Poisson process of recovery marks and every
// (site, axis) pair a rate-`arrow_rate` Poisson process of arrow marks, each
// arrow tagged with an independent uniform. Marks are generated per time block
// from a keyed stream, so "next mark after t" is a pure function of
// (seed, site, axis, t) and costs O(marks per block) regardless of t.
//
// A process with infection rate lambda <= arrow_rate uses exactly the arrows
// whose uniform is below lambda / arrow_rate. Running several rates against one
// set of marks yields the monotone (basic) coupling.

#include <cstdint>
#include <limits>

namespace ocp {

struct ArrowMark {
  double time = std::numeric_limits<double>::infinity();
  double uniform = 1.0;
};

class HarrisMarks {
 public:
  HarrisMarks(std::uint64_t seed, double arrow_rate);

  double arrow_rate() const noexcept { return arrow_rate_; }

  /// First recovery mark at `site` strictly after `after`; +inf past `horizon`.
  double next_recovery(std::uint64_t site, double after, double horizon) const noexcept;

  /// First arrow mark on (site, axis) strictly after `after`; time +inf past `horizon`.
  ArrowMark next_arrow(std::uint64_t site, int axis, double after, double horizon) const noexcept;

 private:
  std::uint64_t seed_;
  double arrow_rate_;
  double arrow_block_;
};

}  // namespace ocp
