#pragma once

#include <cstddef>
#include <functional>

namespace memheat {

/// Upper bound on worker threads used by the library (0 means hardware concurrency).
void set_thread_limit(std::size_t n);
std::size_t thread_limit();

/// Runs body(i) for i in [0, count). Each index is handled by exactly one
/// worker; results must be written to per-index slots. Exceptions are rethrown
/// on the calling thread (the one from the lowest failing index).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace memheat
