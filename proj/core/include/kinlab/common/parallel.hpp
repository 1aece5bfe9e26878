#pragma once

#include <cstddef>
#include <functional>

namespace kinlab {

// Number of worker threads used by parallel_for when no explicit count is
// given.  0 means hardware concurrency.  Results never depend on this value.
void set_default_workers(int workers);
int default_workers();

// Runs fn(i) for i in [0, n).  Work is split into contiguous ranges; the
// first exception thrown by any worker is rethrown on the caller's thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers = -1);

}  // namespace kinlab
