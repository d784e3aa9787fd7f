#pragma once

#include <cstddef>
#include <functional>

namespace gevcast {

/// Caps the number of worker threads used by parallel_for. Zero restores the
/// default (std::thread::hardware_concurrency()).
void set_max_threads(unsigned threads);
unsigned max_threads();

/// Runs body(i) for i in [0, n). Iterations must write only to their own
/// output slots; results are then independent of scheduling. Calls nested
/// inside a running parallel_for execute serially on the calling worker.
/// If iterations throw, the exception from the lowest index is rethrown
/// after all iterations finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gevcast
