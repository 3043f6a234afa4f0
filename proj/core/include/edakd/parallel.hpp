#pragma once

#include <cstddef>
#include <functional>

namespace edakd {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Work is split into
/// contiguous static chunks; callers write results into per-index slots so the
/// outcome never depends on the worker count. The first exception thrown by any
/// worker is rethrown on the calling thread.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace edakd
