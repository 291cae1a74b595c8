#pragma once

#include <cstddef>
#include <functional>

namespace ecrfem {

/// Worker count: FEM_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, count) over contiguous chunks. Callers write
/// into per-index slots, so results do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace ecrfem
