#pragma once

#include <cstddef>
#include <functional>

namespace fedsim {

/// Worker count from FEDSIM_THREADS, else the hardware concurrency (min 1).
std::size_t default_threads();

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into slot i, so the outcome does not depend on scheduling. If any
/// call throws, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace fedsim
