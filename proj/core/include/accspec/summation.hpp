#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace accspec {

// Fixed-order pairwise summation. The split points depend only on the length,
// so equal inputs give bitwise-equal sums regardless of how they were produced.
double pairwise_sum(std::span<const double> values);

// Number of worker threads for embarrassingly parallel loops, read once from
// ACCSPEC_THREADS (default 1).
unsigned worker_threads();

// Runs body(i) for i in [0, count). Each index is written by exactly one call,
// so results do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace accspec
