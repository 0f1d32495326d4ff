#pragma once

#include <cstddef>
#include <functional>

namespace cgw {

/// Worker count: CGWAVE_THREADS if set to a positive integer, else the hardware count.
std::size_t thread_count();

/// Runs fn(0..n-1) on up to thread_count() threads; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cgw
