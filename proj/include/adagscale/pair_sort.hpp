#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "adagscale/pair_gen.hpp"

namespace ags {

struct SortedPairs {
    std::vector<GaussianTilePair> pairs;  // ascending by key, stable
    // [start, end) span per tile index; empty spans for untouched tiles.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
};

// LSD radix sort (8-bit digits, 8 passes). Stable, so pairs with identical
// keys keep their emission order and rendering stays deterministic.
SortedPairs sort_pairs(std::vector<GaussianTilePair> pairs, int tile_count);

}  // namespace ags
