#pragma once

#include <cstddef>
#include <functional>

namespace manakov {

/// Number of workers to use: `requested` if nonzero, else the hardware
/// concurrency; always capped by the MANAKOV_THREADS environment variable.
unsigned worker_count(unsigned requested = 0);

/// Calls task(i) for i in [0, n) on up to `workers` threads.  Tasks must
/// write only to per-index storage.  The first exception thrown by a task is
/// rethrown after all workers join.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace manakov
