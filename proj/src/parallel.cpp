#include "apig/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace apig {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace detail {

void parallel_for_impl(Eigen::Index n, ExecMode mode, void* ctx, void (*body)(void*, Eigen::Index)) {
#ifdef _OPENMP
  if (mode == ExecMode::Parallel && n > 1) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) body(ctx, i);
    return;
  }
#else
  (void)mode;
#endif
  for (Eigen::Index i = 0; i < n; ++i) body(ctx, i);
}

}  // namespace detail
}  // namespace apig
