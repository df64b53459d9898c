#pragma once

#include <cstddef>
#include <functional>

namespace rlab {

// Worker cap: REGURGELAB_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n). Items are split into contiguous chunks, one per
// worker; callers write results into slots keyed by i, so the assembled output
// does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rlab
