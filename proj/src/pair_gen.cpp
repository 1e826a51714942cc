#include "adagscale/pair_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adagscale/parallel.hpp"

namespace ags {

EffectiveRadius effective_radius(float opacity, float th,
                                 const SymMat2& cov2d) {
    const float r = std::sqrt(2.0f * std::log(opacity / th));
    const float lmax = eigen_sym2(cov2d).l1;
    return {r, r * std::sqrt(std::max(lmax, 0.0f))};
}

namespace {

struct TileRect {
    float x0, y0, x1, y1;  // closed pixel-area extents, clipped to the image
};

TileRect tile_rect(const TileGrid& grid, int tx, int ty) {
    const float ts = static_cast<float>(grid.tile_size);
    TileRect r;
    r.x0 = tx * ts;
    r.y0 = ty * ts;
    r.x1 = std::min(r.x0 + ts, static_cast<float>(grid.width));
    r.y1 = std::min(r.y0 + ts, static_cast<float>(grid.height));
    return r;
}

struct TileSpan {
    int tx0, ty0, tx1, ty1;  // inclusive
    bool empty;
};

// Tiles whose closed clipped rect can touch the closed box
// [cx - rx, cx + rx] x [cy - ry, cy + ry].
TileSpan tile_span(const TileGrid& grid, Vec2f center, float rx, float ry) {
    TileSpan s;
    const float ts = static_cast<float>(grid.tile_size);
    s.tx0 = std::max(0, static_cast<int>(std::floor((center.x - rx) / ts)));
    s.ty0 = std::max(0, static_cast<int>(std::floor((center.y - ry) / ts)));
    s.tx1 = std::min(grid.tiles_x - 1,
                     static_cast<int>(std::floor((center.x + rx) / ts)));
    s.ty1 = std::min(grid.tiles_y - 1,
                     static_cast<int>(std::floor((center.y + ry) / ts)));
    s.empty = s.tx0 > s.tx1 || s.ty0 > s.ty1 ||
              center.x + rx < 0.0f || center.y + ry < 0.0f ||
              center.x - rx > static_cast<float>(grid.width) ||
              center.y - ry > static_cast<float>(grid.height);
    return s;
}

bool box_overlap(const TileRect& t, Vec2f c, float rx, float ry) {
    return t.x0 <= c.x + rx && c.x - rx <= t.x1 && t.y0 <= c.y + ry &&
           c.y - ry <= t.y1;
}

// Minimum of the Mahalanobis quadratic form over a closed axis-aligned
// rectangle: zero if the center is inside, otherwise the clamped 1D minimum
// along each edge.
float min_quad_to_rect(const SymMat2& q, Vec2f center, const TileRect& t) {
    if (center.x >= t.x0 && center.x <= t.x1 && center.y >= t.y0 &&
        center.y <= t.y1)
        return 0.0f;
    auto horizontal = [&](float y) {
        const float dy = y - center.y;
        float x = center.x - q.xy * dy / q.xx;
        x = std::clamp(x, t.x0, t.x1);
        return q.quad({x - center.x, dy});
    };
    auto vertical = [&](float x) {
        const float dx = x - center.x;
        float y = center.y - q.xy * dx / q.yy;
        y = std::clamp(y, t.y0, t.y1);
        return q.quad({dx, y - center.y});
    };
    return std::min(std::min(horizontal(t.y0), horizontal(t.y1)),
                    std::min(vertical(t.x0), vertical(t.x1)));
}

// Separating-axis test between an axis-aligned tile rect and an oriented
// rectangle (center c, unit axes u/v, half-extents a/b). Closed regions:
// touching counts as overlap.
bool obb_overlap(const TileRect& t, Vec2f c, Vec2f u, Vec2f v, float a,
                 float b) {
    const float rx = a * std::abs(u.x) + b * std::abs(v.x);
    const float ry = a * std::abs(u.y) + b * std::abs(v.y);
    if (!box_overlap(t, c, rx, ry)) return false;

    const Vec2f tc{0.5f * (t.x0 + t.x1), 0.5f * (t.y0 + t.y1)};
    const float hw = 0.5f * (t.x1 - t.x0);
    const float hh = 0.5f * (t.y1 - t.y0);
    const Vec2f d = tc - c;
    // Project the tile onto the OBB axes.
    const float tile_u = hw * std::abs(u.x) + hh * std::abs(u.y);
    if (std::abs(d.dot(u)) > a + tile_u) return false;
    const float tile_v = hw * std::abs(v.x) + hh * std::abs(v.y);
    if (std::abs(d.dot(v)) > b + tile_v) return false;
    return true;
}

}  // namespace

void intersect_tiles(const SplatView& s, const TileGrid& grid, Mode mode,
                     const RenderConfig& cfg, std::vector<int>& out) {
    const float tau = cfg.alpha_threshold;
    const float th = (mode == Mode::AdaGScale) ? s.th : tau;

    const Eigen2 eig = eigen_sym2(s.cov2d);
    float r = std::sqrt(2.0f * std::log(s.opacity / th));
    if (mode == Mode::AABB && cfg.fixed_radius_aabb) r = 3.0f;
    const float r_px = r * std::sqrt(std::max(eig.l1, 0.0f));

    if (mode == Mode::AABB) {
        const TileSpan span = tile_span(grid, s.mean2d, r_px, r_px);
        if (span.empty) return;
        for (int ty = span.ty0; ty <= span.ty1; ++ty)
            for (int tx = span.tx0; tx <= span.tx1; ++tx)
                if (box_overlap(tile_rect(grid, tx, ty), s.mean2d, r_px, r_px))
                    out.push_back(ty * grid.tiles_x + tx);
        return;
    }

    if (mode == Mode::OBB) {
        // Candidates come from the AABB square, which keeps the OBB tile set
        // a subset of AABB's; the clipped corners carry alpha below th anyway.
        const TileSpan span = tile_span(grid, s.mean2d, r_px, r_px);
        if (span.empty) return;
        const float a = r * std::sqrt(std::max(eig.l1, 0.0f));
        const float b = r * std::sqrt(std::max(eig.l2, 0.0f));
        for (int ty = span.ty0; ty <= span.ty1; ++ty)
            for (int tx = span.tx0; tx <= span.tx1; ++tx) {
                const TileRect t = tile_rect(grid, tx, ty);
                if (box_overlap(t, s.mean2d, r_px, r_px) &&
                    obb_overlap(t, s.mean2d, eig.v1, eig.v2, a, b))
                    out.push_back(ty * grid.tiles_x + tx);
            }
        return;
    }

    // Ellipse / AdaGScale: exact closed-ellipse vs closed-tile test inside
    // the ellipse's tight bounding box.
    const float ext_x = r * std::sqrt(std::max(s.cov2d.xx, 0.0f));
    const float ext_y = r * std::sqrt(std::max(s.cov2d.yy, 0.0f));
    const TileSpan span = tile_span(grid, s.mean2d, ext_x, ext_y);
    if (span.empty) return;
    const float r2 = r * r;
    for (int ty = span.ty0; ty <= span.ty1; ++ty)
        for (int tx = span.tx0; tx <= span.tx1; ++tx) {
            const TileRect t = tile_rect(grid, tx, ty);
            if (!box_overlap(t, s.mean2d, ext_x, ext_y)) continue;
            if (min_quad_to_rect(s.inv_cov, s.mean2d, t) <= r2)
                out.push_back(ty * grid.tiles_x + tx);
        }
}

PairGenResult generate_pairs(std::span<const SplatView> splats,
                             const TileGrid& grid, Mode mode,
                             const RenderConfig& cfg) {
    PairGenResult res;
    res.tile_counts.assign(splats.size(), 0);

    parallel_chunks(splats.size(), cfg.thread_count,
                    [&](std::size_t begin, std::size_t end) {
        std::vector<int> scratch;
        for (std::size_t i = begin; i < end; ++i) {
            scratch.clear();
            intersect_tiles(splats[i], grid, mode, cfg, scratch);
            res.tile_counts[i] = static_cast<std::uint32_t>(scratch.size());
        }
    });

    std::vector<std::size_t> offsets(splats.size() + 1, 0);
    for (std::size_t i = 0; i < splats.size(); ++i)
        offsets[i + 1] = offsets[i] + res.tile_counts[i];
    const std::size_t total = offsets.back();
    if (total > cfg.pair_budget)
        throw PairBudgetError("pair count " + std::to_string(total) +
                              " exceeds budget " +
                              std::to_string(cfg.pair_budget));

    res.pairs.resize(total);
    parallel_chunks(splats.size(), cfg.thread_count,
                    [&](std::size_t begin, std::size_t end) {
        std::vector<int> scratch;
        for (std::size_t i = begin; i < end; ++i) {
            scratch.clear();
            intersect_tiles(splats[i], grid, mode, cfg, scratch);
            std::size_t at = offsets[i];
            for (int tile : scratch) {
                res.pairs[at].key = pack_pair_key(
                    static_cast<std::uint32_t>(tile), splats[i].depth);
                res.pairs[at].splat_index = static_cast<std::uint32_t>(i);
                ++at;
            }
        }
    });
    return res;
}

}  // namespace ags
