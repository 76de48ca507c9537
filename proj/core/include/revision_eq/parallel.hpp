#pragma once

#include <cstddef>
#include <functional>

namespace revision_eq {

/// Worker count from REVISION_EQ_THREADS (0 or unset = hardware concurrency).
unsigned resolve_worker_count(unsigned requested = 0);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome does not depend on the worker count. The first exception thrown
/// by any call is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace revision_eq
