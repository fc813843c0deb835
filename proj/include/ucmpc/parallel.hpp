#ifndef UCMPC_PARALLEL_HPP_
#define UCMPC_PARALLEL_HPP_

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ucmpc {

/// Execution mode for the data-parallel kernels. Every kernel has a serial
/// path that computes identical results slot by slot; the OpenMP path only
/// distributes independent slots over threads, so results are bit-identical.
enum class Exec { Serial, Parallel };

/// Runs body(i) for i in [0, count). Each slot must be independent.
template <typename Body>
void parallel_for(std::size_t count, Exec mode, Body&& body) {
#ifdef _OPENMP
  if (mode == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace ucmpc

#endif
