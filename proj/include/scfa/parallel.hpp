#pragma once

#include <cstddef>
#include <functional>

namespace scfa {

// Worker cap: SCFA_THREADS env var, 0 or unset = hardware concurrency.
int max_threads();

// Runs fn(0..count-1) across the worker cap. Each index writes only its own
// result slot, so output is deterministic regardless of thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace scfa
