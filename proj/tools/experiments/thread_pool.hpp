#pragma once

#include <cstddef>
#include <functional>

namespace giantstep::experiments {

inline constexpr const char* kThreadsEnv = "GIANTSTEP_THREADS";

// GIANTSTEP_THREADS when set (a positive integer), else the hardware
// concurrency. Throws InputError for a malformed value.
int thread_count_from_env();

// Runs fn(0..count-1) on up to `threads` workers that pull the next index
// from a shared counter. The first exception (lowest index) is rethrown
// after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace giantstep::experiments
