#pragma once

#include <cstddef>
#include <functional>

namespace prescurv {

/// Worker count used by the assembly layers. Reads PRESCURV_THREADS once;
/// defaults to the hardware concurrency.
unsigned worker_count();

/// Runs body(begin, end) over disjoint contiguous ranges covering [0, n).
/// If several ranges throw, the exception from the lowest range is rethrown,
/// so error reports do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace prescurv
