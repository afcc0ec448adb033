#pragma once

#include <cstddef>
#include <functional>

namespace tblockgs {

/// Worker cap: the TBLOCKGS_THREADS environment variable when set to a
/// positive integer, otherwise the hardware concurrency (at least 1).
unsigned thread_cap();

/// Run fn(0..count-1) across up to thread_cap() threads.  Work is assigned
/// statically by index, so writes into index-addressed storage keep results
/// independent of scheduling.  Exceptions from workers are rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace tblockgs
