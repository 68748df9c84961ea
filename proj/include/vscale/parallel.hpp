#pragma once

#include <cstddef>
#include <functional>

namespace vscale {

/// Hardware concurrency, at least 1.
unsigned default_threads();

/// Runs fn(i) for every i in [0, count) on up to `threads` workers. Callers
/// write results to per-index slots; the call order is unspecified. The
/// first exception thrown by fn is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace vscale
