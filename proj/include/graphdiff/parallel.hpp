#pragma once

// Replica-level parallelism.  Monte Carlo replicas are independent, so the
// OpenMP driver just hands out replica indices; every replica writes into its
// own slot and all randomness is keyed by replica id, so the result does not
// depend on the thread count.  The serial driver is the reference the
// parallel one is tested against.

#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace graphdiff {

inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Runs fn(replica) for replica in [0, n).  threads <= 0 means "library
// default".  fn must only touch replica-owned state.
template <class Fn>
void for_each_replica(std::int64_t n, int threads, Fn&& fn) {
#if defined(_OPENMP)
    if (threads > 0) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
        for (std::int64_t i = 0; i < n; ++i) fn(i);
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) fn(i);
    }
#else
    (void)threads;
    for (std::int64_t i = 0; i < n; ++i) fn(i);
#endif
}

// Plain loop with the same contract; kept so tests can pin down that the
// OpenMP path changes nothing but wall time.
template <class Fn>
void for_each_replica_serial(std::int64_t n, Fn&& fn) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace graphdiff
