#pragma once

#include <cstdint>
#include <vector>

#include "bns/features.hpp"

namespace bns {

// Arithmetic grid of equally long, equally spaced windows.
struct WindowGrid {
    std::int64_t start0 = 0;   // start of window 0, seconds
    std::int64_t step = 0;     // seconds between window starts, > 0
    std::int64_t length = 0;   // window length, seconds, > 0
    std::size_t count = 0;

    WindowSpec window(std::size_t i) const {
        std::int64_t s = start0 + static_cast<std::int64_t>(i) * step;
        return {s, s + length};
    }
    std::int64_t first_start() const { return start0; }
    std::int64_t last_end() const { return window(count - 1).end; }
};

// Builds the BNS vector for every window of the grid. Produces bit-identical
// values to calling build_bns_vector per window; the win is shared work:
// hour-cell moment/bin caches plus sliding order-statistic and distinct-count
// structures, parallelized across attributes' window stripes.
std::vector<BNSVector> build_vector_series(const AttributeStore& store, FeatureSetId set,
                                           const WindowGrid& grid, const FeatureOptions& opts = {});

}  // namespace bns
