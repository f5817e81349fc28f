#pragma once

#include <cstddef>
#include <functional>

namespace fermsig {

/// Worker count: FERMSIG_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// True when FERMSIG_THREADS is unset or holds a positive integer.
bool worker_env_valid();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into pre-sized slots so the
/// output does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fermsig
