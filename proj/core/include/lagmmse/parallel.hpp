#pragma once

#include <cstddef>
#include <functional>

namespace lagmmse {

// Worker count: min(hardware_concurrency, LAGMMSE_THREADS if set).
std::size_t worker_count();

// Runs body(i) for i in [0, n) on the worker pool with static chunking.
// Callers write results into index-addressed storage, so the outcome is
// independent of scheduling; reductions happen afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lagmmse
