#include "giantpair/execution.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace giantpair {

int worker_count(const Execution& exec) {
    if (exec.sequential) return 1;
    if (exec.threads > 0) return exec.threads;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace giantpair
