#pragma once
#include <functional>

namespace rmtkit {

// Worker count resolution: explicit request (>0) wins, then the RMT_KIT_THREADS
// environment variable, then hardware concurrency.  Always >= 1.
int resolve_threads(int requested);

// Runs fn(0..n-1) on up to nthreads workers.  Work is pulled from an atomic
// counter, so any assignment of indices to workers is possible; callers must
// make per-index results independent of the executing worker.  The first
// exception thrown by any task is rethrown on the calling thread.
void parallel_for(int n, int nthreads, const std::function<void(int)>& fn);

} // namespace rmtkit
