#pragma once

#include <cstddef>
#include <functional>

namespace gaplab {

// Worker count: GAPLAB_THREADS when set (clamped to [1, 64]), else
// hardware_concurrency.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on a bounded pool. Deterministic as long as fn
// writes only to slot i of pre-sized output storage. Exceptions from workers
// are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gaplab
