#pragma once

#include <cstddef>
#include <functional>

namespace pcf {

/// Worker count: PCF_THREADS when set to a positive integer, otherwise the
/// number of logical cores.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on a bounded pool. Each index runs exactly
/// once; the first exception thrown by any body is rethrown after all workers
/// finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace pcf
