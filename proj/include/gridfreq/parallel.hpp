#pragma once

#include <cstddef>
#include <functional>

namespace gridfreq {

// Number of worker threads for internal parallel maps. Controlled by the
// GRIDFREQ_THREADS environment variable; defaults to the hardware count.
int worker_thread_count();

// Runs fn(i) for i in [0, count) across workers. Results must be written to
// pre-sized storage indexed by i so the output order is deterministic.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace gridfreq
