#pragma once
// Execution policy for the data-parallel kernels. The serial path is the
// reference implementation; the parallel path runs the same per-index body
// under OpenMP. Because every draw site derives its own generator, the two
// paths produce bitwise-identical results for any thread count.

#include <exception>
#include <mutex>

namespace dptf {

enum class ExecPolicy { serial, parallel };

template <class F>
void for_each_index(ExecPolicy exec, int n, F&& body) {
#ifdef _OPENMP
  if (exec == ExecPolicy::parallel) {
    // exceptions must not unwind across the region boundary; capture the
    // first one and rethrow outside
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < n; ++idx) {
      try {
        body(idx);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return;
  }
#else
  (void)exec;
#endif
  for (int idx = 0; idx < n; ++idx) {
    body(idx);
  }
}

}  // namespace dptf
