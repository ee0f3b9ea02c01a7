#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mdm {

// Batch kernels take an explicit thread count: 1 selects the serial
// reference path, 0 selects the OpenMP default. Results are written into
// preallocated per-index slots, so serial and parallel runs produce
// identical output.
inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <typename F>
void parallel_for(std::size_t count, F&& body, int threads = 0) {
#if defined(_OPENMP)
    if (threads != 1) {
        const int requested = threads <= 0 ? omp_get_max_threads() : threads;
#pragma omp parallel for schedule(dynamic) num_threads(requested)
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)threads;
#endif
    for (std::size_t i = 0; i < count; ++i) {
        body(i);
    }
}

} // namespace mdm
