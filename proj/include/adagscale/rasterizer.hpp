#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "adagscale/image.hpp"
#include "adagscale/lut.hpp"
#include "adagscale/pair_gen.hpp"
#include "adagscale/pair_sort.hpp"
#include "adagscale/preprocess.hpp"

namespace ags {

// One alpha-blend event: `weight` is alpha * T, the factor applied to the
// splat's color at that pixel.
struct BlendRecord {
    std::uint32_t pixel;  // y * width + x
    std::uint32_t splat;  // index into the view's splat sequence
    float alpha;
    float weight;
};

struct RecordOptions {
    bool max_t = false;          // per-splat max transmittance before blend
    bool contributions = false;  // full blend-event stream
};

struct RenderReport {
    Image image;
    std::size_t pair_count = 0;
    std::size_t splat_count = 0;
    std::map<std::string, double> stage_times;  // seconds per stage
    // Per splat; 0 marks a splat that never blended any pixel.
    std::vector<float> max_t;
    // Concatenated in tile-index order regardless of thread schedule.
    std::vector<BlendRecord> contributions;
};

// Eq. of the Gaussian falloff: opacity * exp(-0.5 * d^T inv_cov d), clamped
// to alpha_clamp. `pixel` is a pixel-center coordinate.
inline float alpha_at(const SplatView& s, Vec2f pixel, float alpha_clamp) {
    const Vec2f d = pixel - s.mean2d;
    const float power = -0.5f * s.inv_cov.quad(d);
    if (power > 0.0f) return 0.0f;  // numerical guard; quad is PSD
    const float a = s.opacity * std::exp(power);
    return a < alpha_clamp ? a : alpha_clamp;
}

// Front-to-back blend of one tile's sorted pair span into `out`. The blend
// threshold is always cfg.alpha_threshold, independent of the pair-gen mode.
void raster_tile(std::span<const GaussianTilePair> tile_pairs,
                 std::span<const SplatView> splats, const TileGrid& grid,
                 int tile_index, const RenderConfig& cfg, Image& out,
                 std::vector<float>* max_t,
                 std::vector<BlendRecord>* contributions);

// Full pipeline: preprocess -> pair generation -> sort -> rasterize.
// Deterministic for fixed inputs regardless of thread count. `lut` is
// required in AdaGScale mode.
RenderReport render(std::span<const Gaussian3D> scene, const Camera& cam,
                    const RenderConfig& cfg, const TUpperLUT* lut = nullptr,
                    const RecordOptions& rec = {});

}  // namespace ags
