#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace apig {

/// Execution mode for the data-parallel kernels. Every kernel has a serial
/// path and an OpenMP path that produce identical results (each output
/// element is computed independently, with a fixed accumulation order).
enum class ExecMode { Serial, Parallel };

/// Number of worker threads the Parallel mode may use (1 without OpenMP).
int max_threads();

namespace detail {
void parallel_for_impl(Eigen::Index n, ExecMode mode, void* ctx, void (*body)(void*, Eigen::Index));
}

/// Runs body(i) for i in [0, n). In Parallel mode iterations are distributed
/// over OpenMP threads; the body must not carry loop-order dependencies.
template <typename F>
void parallel_for(Eigen::Index n, ExecMode mode, F&& body) {
  auto thunk = [](void* ctx, Eigen::Index i) { (*static_cast<F*>(ctx))(i); };
  detail::parallel_for_impl(n, mode, &body, thunk);
}

}  // namespace apig
