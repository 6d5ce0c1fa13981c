#pragma once

#include <cstddef>
#include <functional>

namespace curvpose {

// 0 means std::thread::hardware_concurrency().
int resolve_thread_count(int requested);

// Calls fn(i, worker) for every i in [0, n). Indices are split into contiguous
// blocks, one per worker, so the mapping of work to worker depends only on n and
// the thread count. Exceptions thrown by fn are rethrown on the calling thread.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t index, int worker)>& fn);

}  // namespace curvpose
