#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace epishear {

inline int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// static schedule over [0, n); each index touches only its own output
template <class F>
void parallel_for(int n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
#else
    for (int i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace epishear
