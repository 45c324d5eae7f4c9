#pragma once

#include <cstddef>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace ocp {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = all cores).
/// Callers write per-index results into preallocated storage and reduce them
/// in index order afterwards, so results do not depend on the thread count.
template <class Fn>
void parallel_for_index(std::size_t n, int threads, Fn&& fn) {
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  tbb::task_arena arena(threads <= 0 ? tbb::task_arena::automatic : threads);
  arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
      for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
    });
  });
}

}  // namespace ocp
