#pragma once

#include <cstddef>
#include <functional>

namespace oukit {

/// Runs fn(i) for i in [0, count) on up to n_threads workers. Callers write
/// results to per-index slots; scheduling order is unspecified, so the final
/// state must not depend on it. The first exception thrown is rethrown after
/// all workers join.
void parallel_for(std::size_t count, int n_threads, const std::function<void(std::size_t)>& fn);

}  // namespace oukit
