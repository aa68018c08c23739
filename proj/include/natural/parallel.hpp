#pragma once

#include <functional>

namespace natural {

/// Worker count from NATURAL_THREADS (default: hardware concurrency, at least 1).
int thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, count).  Chunks write disjoint
/// outputs, so results do not depend on the thread count.
void parallel_for(int count, const std::function<void(int, int)>& body, int threads = 0);

}  // namespace natural
