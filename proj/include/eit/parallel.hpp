#pragma once

#include <functional>

namespace eit {

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// Results must be written to disjoint slots; the first exception is
/// rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace eit
