#pragma once

#include <cstddef>
#include <functional>

namespace kdelab {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 means the
/// hardware concurrency). Work items are claimed dynamically; callers write
/// results into per-index slots so the outcome does not depend on the
/// schedule. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Worker count actually used for a request.
[[nodiscard]] int resolve_threads(int requested) noexcept;

}  // namespace kdelab
