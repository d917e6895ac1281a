#pragma once

#include <cstddef>
#include <functional>

namespace pscforge {

// Worker pool size used by grid scans. Thread-safe to read; set once up
// front (CLI --threads). Results never depend on this value: work is split
// into blocks indexed independently of the pool size, each block writes its
// own slot, and reductions run afterwards in block order.
int worker_count();
void set_worker_count(int n);

// Runs fn(0), ..., fn(blocks-1), possibly concurrently. fn must only touch
// per-block state. Exceptions are rethrown (first one wins).
void parallel_for(std::size_t blocks, const std::function<void(std::size_t)>& fn);

}  // namespace pscforge
