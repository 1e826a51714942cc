#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adagscale/preprocess.hpp"
#include "adagscale/scene.hpp"

namespace ags {

struct TileGrid {
    int tile_size = 16;
    int width = 0, height = 0;  // image, pixels
    int tiles_x = 0, tiles_y = 0;

    static TileGrid make(int width, int height, int tile_size) {
        TileGrid g;
        g.tile_size = tile_size;
        g.width = width;
        g.height = height;
        g.tiles_x = (width + tile_size - 1) / tile_size;
        g.tiles_y = (height + tile_size - 1) / tile_size;
        return g;
    }
    int tile_count() const { return tiles_x * tiles_y; }
};

// bits 63..32 = row-major tile index, bits 31..0 = IEEE-754 pattern of the
// positive depth, so unsigned key order equals (tile, depth) order.
inline std::uint64_t pack_pair_key(std::uint32_t tile, float depth) {
    return (static_cast<std::uint64_t>(tile) << 32) |
           std::bit_cast<std::uint32_t>(depth);
}
inline std::uint32_t pair_key_tile(std::uint64_t key) {
    return static_cast<std::uint32_t>(key >> 32);
}
inline float pair_key_depth(std::uint64_t key) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(key));
}

struct GaussianTilePair {
    std::uint64_t key;
    std::uint32_t splat_index;
};

struct EffectiveRadius {
    float mahalanobis;  // sqrt(2 * ln(opacity / th))
    float pixels;       // mahalanobis * sqrt(lambda_max(cov2d))
};

// Level-set radius at which alpha drops to `th`. Requires opacity > th.
EffectiveRadius effective_radius(float opacity, float th, const SymMat2& cov2d);

// Tile indices (row-major, ascending) whose closed pixel-area square is hit
// by the splat's footprint under the given mode. ADAGSCALE uses the splat's
// own th; the lossless modes force tau.
void intersect_tiles(const SplatView& s, const TileGrid& grid, Mode mode,
                     const RenderConfig& cfg, std::vector<int>& out);

struct PairGenResult {
    std::vector<GaussianTilePair> pairs;       // splat order, then tile order
    std::vector<std::uint32_t> tile_counts;    // per splat
};

// Throws PairBudgetError when the total pair count would exceed
// cfg.pair_budget. Output is identical for any thread count.
PairGenResult generate_pairs(std::span<const SplatView> splats,
                             const TileGrid& grid, Mode mode,
                             const RenderConfig& cfg);

struct PairBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ags
