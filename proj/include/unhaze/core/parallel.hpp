#pragma once

#include <functional>

namespace unhaze {

// Runs fn(0..count-1) across up to `jobs` worker threads. jobs <= 1 runs
// serially on the calling thread. The first exception thrown by any worker is
// rethrown after all workers join. Callers must make iterations independent;
// determinism is preserved by writing results into per-index slots.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace unhaze
