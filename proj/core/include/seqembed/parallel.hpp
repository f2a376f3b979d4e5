#pragma once

#include <cstddef>
#include <functional>

namespace seqembed {

/// 0 means "use the hardware default".
std::size_t resolve_threads(std::size_t requested);

/// Runs fn(i) for i in [0, n) across a static partition of worker threads.
/// Workers receive disjoint contiguous ranges, so per-index output slots need
/// no synchronization. Exceptions are captured and rethrown on the caller.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace seqembed
