#pragma once

#include <cstddef>
#include <functional>

namespace semaquery {

//! Runs task(0..count-1) on up to `n_threads` threads and waits for all of them. Tasks are claimed in index
//! order. The first exception thrown by any task is rethrown after every thread has joined.
void RunParallel(size_t n_threads, size_t count, const std::function<void(size_t)> &task);

} // namespace semaquery
