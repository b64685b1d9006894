#pragma once

#include <cstddef>
#include <functional>

namespace cfbp {

/// Worker count used by data-parallel kernels. Defaults to 1; the CLI sets it.
void set_thread_count(int n);
int thread_count() noexcept;

/// Fixed number of chunks used by parallel_chunks, independent of the thread
/// count, so reductions combined in chunk order give identical bits for any
/// number of workers.
int reduction_chunks() noexcept;

/// Splits [0, n) into reduction_chunks() contiguous chunks and runs
/// body(chunk, begin, end) for each on up to thread_count() workers.
void parallel_chunks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& body);

}  // namespace cfbp
