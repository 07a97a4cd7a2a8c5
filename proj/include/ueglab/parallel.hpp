#pragma once

#include <cstddef>
#include <functional>

namespace ueglab {

/// Lane count from UEGLAB_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t default_lane_count();

/// Runs body(i) for i in [0, count) on up to `lanes` threads (0 picks
/// default_lane_count()). Work items must not share mutable state. If any
/// item throws, the exception of the lowest failing index is rethrown after
/// all lanes finish.
void parallel_for(std::size_t count, std::size_t lanes, const std::function<void(std::size_t)>& body);

}  // namespace ueglab
