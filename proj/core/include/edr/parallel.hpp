#pragma once

#include <cstddef>
#include <functional>

namespace edr {

/// Run task(i) for i in [0, n) on up to `jobs` threads. Tasks must write only
/// to their own slot. The exception of the lowest failing index is rethrown
/// after every task has finished.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& task);

}  // namespace edr
