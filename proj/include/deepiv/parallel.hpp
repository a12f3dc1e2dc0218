#pragma once

#include <cstddef>
#include <functional>

namespace deepiv {

// Worker count actually used for n_tasks: hardware concurrency, capped by
// the DEEPIV_THREADS environment variable when set, and by n_tasks.
std::size_t worker_count(std::size_t n_tasks);

// Runs fn(0..n_tasks-1) across a small thread pool. Tasks must write
// only to their own output slots; the first exception thrown by a task
// is rethrown after all workers finish.
void run_parallel(std::size_t n_tasks, const std::function<void(std::size_t)>& fn);

}  // namespace deepiv
