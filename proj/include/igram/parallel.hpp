#pragma once

#include <functional>

namespace igram {

// Number of worker threads to use. Reads INTERFERO_THREADS once per process;
// unset or 0 means "use the hardware concurrency".
int thread_budget();

// Runs fn(begin, end) over disjoint chunks of [0, n). Chunk boundaries depend
// only on n and the thread budget, and each chunk writes only its own range,
// so results are identical for any budget as long as the per-chunk work is
// independent. Serial when the budget is 1 or n is small.
void parallel_chunks(int n, const std::function<void(int, int)>& fn);

}  // namespace igram
