#pragma once

#include <cstddef>
#include <functional>

namespace canondual {

/// Worker count: `requested` if nonzero, else CANON_DUAL_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace canondual
