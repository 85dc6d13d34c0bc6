#pragma once

#include <cstddef>
#include <functional>

namespace blowfly {

/// Worker count used when a caller passes 0.
unsigned default_thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// workers and joins. Chunk boundaries do not affect results as long as body
/// writes only to indices it owns.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace blowfly
