#include "adagscale/pair_sort.hpp"

#include <array>

namespace ags {

SortedPairs sort_pairs(std::vector<GaussianTilePair> pairs, int tile_count) {
    const std::size_t n = pairs.size();
    std::vector<GaussianTilePair> scratch(n);

    auto* src = pairs.data();
    auto* dst = scratch.data();
    for (int pass = 0; pass < 8; ++pass) {
        const int shift = pass * 8;
        std::array<std::size_t, 256> counts{};
        for (std::size_t i = 0; i < n; ++i)
            ++counts[(src[i].key >> shift) & 0xFF];
        std::size_t sum = 0;
        for (auto& c : counts) {
            const std::size_t tmp = c;
            c = sum;
            sum += tmp;
        }
        for (std::size_t i = 0; i < n; ++i)
            dst[counts[(src[i].key >> shift) & 0xFF]++] = src[i];
        std::swap(src, dst);
    }
    // Eight passes land the result back in `pairs`.

    SortedPairs out;
    out.pairs = std::move(pairs);
    out.ranges.assign(static_cast<std::size_t>(tile_count), {0, 0});
    std::size_t i = 0;
    while (i < n) {
        const std::uint32_t tile = pair_key_tile(out.pairs[i].key);
        std::size_t j = i + 1;
        while (j < n && pair_key_tile(out.pairs[j].key) == tile) ++j;
        if (tile < out.ranges.size())
            out.ranges[tile] = {static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(j)};
        i = j;
    }
    return out;
}

}  // namespace ags
