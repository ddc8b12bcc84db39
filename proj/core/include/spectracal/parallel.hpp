#pragma once

#include <cstddef>
#include <functional>

namespace spectracal {

/// Worker count from SPECTRACAL_THREADS (default: hardware concurrency, min 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into index-addressed slots so output order never depends
/// on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spectracal
