#pragma once

#include <cstddef>
#include <functional>

namespace qcrsim {

// Worker count: QCRSIM_THREADS if set (clamped to >= 1), else hardware
// concurrency. Parallelism never changes results, only wall time.
unsigned worker_count();

// Runs fn(i) for i in [0, n) on worker_count() threads. Each index writes its
// own output slot, so results are identical for any worker count. Exceptions
// are captured and rethrown (first index wins) after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qcrsim
