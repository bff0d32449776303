#pragma once

#include <cstdint>
#include <functional>

#include "nsdf/types.hpp"

namespace nsdf {

// Worker cap shared by all internally parallel operations. Defaults to the
// hardware concurrency; the CLI overrides it from --threads / NSDF_THREADS.
int max_threads();
void set_max_threads(int n);

// Runs fn(begin, end) over disjoint chunks of [0, n). Chunk boundaries depend
// only on n and the worker cap, and workers write to disjoint outputs, so
// results are identical to the sequential path.
void parallel_for_chunks(Index n, const std::function<void(Index, Index)>& fn);

// Per-index convenience wrapper.
void parallel_for(Index n, const std::function<void(Index)>& fn);

}  // namespace nsdf
