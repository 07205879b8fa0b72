#pragma once

#include <cstddef>
#include <functional>

namespace selfsim {

// Runs fn(0..n-1) on up to `jobs` worker threads.  Order of execution is
// unspecified; callers index into preallocated storage, so results are
// deterministic regardless of scheduling.  The first worker exception is
// rethrown after all threads join.
void run_parallel(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace selfsim
