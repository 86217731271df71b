#pragma once

#include <cstddef>
#include <functional>

namespace mfsg {

/// Worker count used by parallel_for; defaults to 1.
void set_worker_count(int n);
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Work items are
/// claimed dynamically, so callers must make fn(i) depend on i alone. The
/// first exception thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mfsg
