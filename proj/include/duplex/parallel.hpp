#pragma once

#include <cstddef>
#include <functional>

namespace duplex {

// Worker count: DUPLEX_THREADS if set and positive, else the hardware count.
std::size_t thread_count();

// Calls body(i) for i in [0, count) on up to thread_count() threads; nested
// calls run serially.  The first exception thrown by any call is rethrown
// after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace duplex
