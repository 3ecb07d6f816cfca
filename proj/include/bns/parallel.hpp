#pragma once

#include <cstddef>
#include <functional>

namespace bns {

// Worker count: min(BNS_THREADS if set, hardware concurrency), at least 1.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) across worker threads in contiguous stripes.
// Results written by fn must go to disjoint locations; no ordering guarantees
// beyond stripe-internal sequential execution. Exceptions propagate to the
// caller (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Stripe variant: fn(begin, end) per stripe; cheaper when per-item dispatch
// overhead matters or when a stripe carries sequential state.
void parallel_stripes(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bns
