#pragma once

#include <cstddef>
#include <functional>

namespace wedge {

/// Number of worker threads to use when the caller passes jobs <= 0.
int default_jobs();

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work items must be
/// independent; results are written by index so scheduling never changes them.
/// The first exception thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace wedge
