#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "adagscale/pair_gen.hpp"
#include "adagscale/rasterizer.hpp"
#include "adagscale/synth.hpp"

using namespace ags;

namespace {

SplatView make_splat(Vec2f mean, SymMat2 cov, float opacity, float th) {
    SplatView s;
    s.mean2d = mean;
    s.cov2d = cov;
    s.inv_cov = cov.inverse();
    s.depth = 5.0f;
    s.rgb = {1, 1, 1};
    s.opacity = opacity;
    s.th = th;
    s.source_id = 0;
    return s;
}

std::vector<int> tiles_of(const SplatView& s, const TileGrid& grid, Mode mode,
                          const RenderConfig& cfg) {
    std::vector<int> out;
    intersect_tiles(s, grid, mode, cfg, out);
    return out;
}

}  // namespace

TEST_SUITE("pair_gen") {

TEST_CASE("effective radius level-set values") {
    const float tau = 1.0f / 255.0f;
    SymMat2 cov{1, 0, 1};
    CHECK(effective_radius(1.0f, tau, cov).mahalanobis ==
          doctest::Approx(3.3290).epsilon(1e-3));
    CHECK(effective_radius(0.5f, 0.013922f, cov).mahalanobis ==
          doctest::Approx(2.676).epsilon(1e-3));
    // the radius collapses as th approaches the opacity
    const float r = effective_radius(0.5f, 0.4999995f, cov).mahalanobis;
    CHECK(r > 0.0f);
    CHECK(r < 0.01f);
    // pixel radius scales with the dominant eigenvalue
    CHECK(effective_radius(1.0f, tau, {4, 0, 1}).pixels ==
          doctest::Approx(2.0 * 3.3290).epsilon(1e-3));
}

TEST_CASE("a small centered splat hits exactly one tile in every mode") {
    const TileGrid grid = TileGrid::make(64, 64, 16);
    const RenderConfig cfg;
    // center of tile (1,1); r_px = 3.326 * 2 = 6.7 < 8
    const SplatView s =
        make_splat({24, 24}, {4, 0, 4}, 0.99f, cfg.alpha_threshold);
    for (Mode m : {Mode::AABB, Mode::OBB, Mode::Ellipse, Mode::AdaGScale}) {
        const auto tiles = tiles_of(s, grid, m, cfg);
        REQUIRE(tiles.size() == 1);
        CHECK(tiles[0] == 1 * grid.tiles_x + 1);
    }
}

TEST_CASE("oriented box beats the axis-aligned square on diagonal splats") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    const RenderConfig cfg;
    // elongated at 45 degrees: eigenvalues ~ (905, 5)
    const SymMat2 cov{455.0f, 450.0f, 455.0f};
    const SplatView s = make_splat({320, 240}, cov, 0.9f, cfg.alpha_threshold);

    const auto aabb = tiles_of(s, grid, Mode::AABB, cfg);
    const auto obb = tiles_of(s, grid, Mode::OBB, cfg);
    const auto ell = tiles_of(s, grid, Mode::Ellipse, cfg);
    CHECK(obb.size() < aabb.size());
    CHECK(ell.size() <= obb.size());

    // Oracle: every pixel whose alpha clears tau must live in an OBB tile
    // (and in an ellipse tile).
    const std::set<int> obb_set(obb.begin(), obb.end());
    const std::set<int> ell_set(ell.begin(), ell.end());
    for (int py = 0; py < grid.height; ++py)
        for (int px = 0; px < grid.width; ++px) {
            const float a =
                alpha_at(s, {px + 0.5f, py + 0.5f}, cfg.alpha_clamp);
            if (a < cfg.alpha_threshold) continue;
            const int tile =
                (py / grid.tile_size) * grid.tiles_x + (px / grid.tile_size);
            REQUIRE(obb_set.count(tile) == 1);
            REQUIRE(ell_set.count(tile) == 1);
        }
}

TEST_CASE("adagscale at th = tau matches the ellipse tile list") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    const RenderConfig cfg;
    const SplatView s =
        make_splat({100, 100}, {120, 30, 60}, 0.8f, cfg.alpha_threshold);
    CHECK(tiles_of(s, grid, Mode::AdaGScale, cfg) ==
          tiles_of(s, grid, Mode::Ellipse, cfg));
}

TEST_CASE("a larger th shrinks the adagscale tile list") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    const RenderConfig cfg;
    SplatView s = make_splat({320, 240}, {400, 0, 400}, 0.9f, 0.02f);
    const auto ada = tiles_of(s, grid, Mode::AdaGScale, cfg);
    const auto ell = tiles_of(s, grid, Mode::Ellipse, cfg);
    CHECK(ada.size() < ell.size());
    const std::set<int> ell_set(ell.begin(), ell.end());
    for (int t : ada) REQUIRE(ell_set.count(t) == 1);
}

TEST_CASE("subset chain holds on random splats") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    const RenderConfig cfg;
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        // random covariance via A A^T + small isotropic floor
        const float a = rng.uniform(-20, 20), b = rng.uniform(-20, 20),
                    c = rng.uniform(-20, 20), d = rng.uniform(-20, 20);
        SymMat2 cov{a * a + b * b + 0.4f, a * c + b * d,
                    c * c + d * d + 0.4f};
        const float opacity = rng.uniform(0.05f, 0.99f);
        const float th = std::min(opacity * rng.uniform(0.1f, 0.9f),
                                  opacity - 1e-4f);
        const SplatView s = make_splat(
            {rng.uniform(-50, 690), rng.uniform(-50, 530)}, cov, opacity,
            std::max(th, 1.0f / 255.0f));
        const auto aabb = tiles_of(s, grid, Mode::AABB, cfg);
        const auto obb = tiles_of(s, grid, Mode::OBB, cfg);
        const auto ell = tiles_of(s, grid, Mode::Ellipse, cfg);
        const auto ada = tiles_of(s, grid, Mode::AdaGScale, cfg);
        const std::set<int> aabb_set(aabb.begin(), aabb.end());
        const std::set<int> obb_set(obb.begin(), obb.end());
        const std::set<int> ell_set(ell.begin(), ell.end());
        for (int t : obb) REQUIRE(aabb_set.count(t) == 1);
        for (int t : ell) REQUIRE(obb_set.count(t) == 1);
        for (int t : ada) REQUIRE(ell_set.count(t) == 1);
    }
}

TEST_CASE("ellipse mode never loses a pixel with alpha above tau") {
    SynthSpec spec;
    spec.layout = "aniso";
    const SynthScene scene = synth_scene(8, 300, spec);
    RenderConfig cfg;
    cfg.mode = Mode::Ellipse;
    const Camera& cam = scene.cameras[0];
    const auto splats = preprocess_view(scene.gaussians, cam, cfg);
    const TileGrid grid = TileGrid::make(cam.width, cam.height, cfg.tile_size);

    for (const auto& s : splats) {
        const auto tiles = tiles_of(s, grid, Mode::Ellipse, cfg);
        const std::set<int> tile_set(tiles.begin(), tiles.end());
        // scan the level-set bounding box only; alpha < tau elsewhere
        const float r =
            std::sqrt(2.0f * std::log(s.opacity / cfg.alpha_threshold));
        const int x0 = std::max(
            0, int(std::floor(s.mean2d.x - r * std::sqrt(s.cov2d.xx))));
        const int x1 = std::min(
            grid.width - 1,
            int(std::ceil(s.mean2d.x + r * std::sqrt(s.cov2d.xx))));
        const int y0 = std::max(
            0, int(std::floor(s.mean2d.y - r * std::sqrt(s.cov2d.yy))));
        const int y1 = std::min(
            grid.height - 1,
            int(std::ceil(s.mean2d.y + r * std::sqrt(s.cov2d.yy))));
        for (int py = y0; py <= y1; ++py)
            for (int px = x0; px <= x1; ++px) {
                const float a =
                    alpha_at(s, {px + 0.5f, py + 0.5f}, cfg.alpha_clamp);
                if (a < cfg.alpha_threshold) continue;
                const int tile = (py / grid.tile_size) * grid.tiles_x +
                                 (px / grid.tile_size);
                REQUIRE(tile_set.count(tile) == 1);
            }
    }
}

TEST_CASE("pair keys pack tile and depth bits") {
    // oracle: independent bit assembly of IEEE-754 1.0f
    float depth = 1.0f;
    std::uint32_t bits;
    std::memcpy(&bits, &depth, 4);
    const std::uint64_t expect = (std::uint64_t(3) << 32) | bits;
    CHECK(expect == 0x000000033F800000ULL);
    CHECK(pack_pair_key(3, 1.0f) == expect);
    CHECK(pair_key_tile(expect) == 3);
    CHECK(pair_key_depth(expect) == 1.0f);
}

TEST_CASE("positive depths sort like their bit patterns") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const float a = rng.uniform(0.01f, 150.0f);
        const float b = rng.uniform(0.01f, 150.0f);
        CHECK((pack_pair_key(0, a) < pack_pair_key(0, b)) == (a < b));
    }
}

TEST_CASE("one splat crossing five tiles emits five pairs") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    const RenderConfig cfg;
    // narrow horizontal footprint: half extents ~30px x ~5px from the center
    // of tile row 7, so it spans tiles 18-22 of that row
    const SplatView s = make_splat({328, 120}, {81, 0, 2.25f}, 0.99f,
                                   cfg.alpha_threshold);
    const auto res =
        generate_pairs(std::vector<SplatView>{s}, grid, Mode::Ellipse, cfg);
    REQUIRE(res.tile_counts.size() == 1);
    CHECK(res.tile_counts[0] == 5);
    REQUIRE(res.pairs.size() == 5);
    for (const auto& p : res.pairs) {
        CHECK(p.splat_index == 0);
        CHECK(pair_key_depth(p.key) == s.depth);
    }
    // row-major emission: consecutive tiles in one row
    for (std::size_t i = 1; i < res.pairs.size(); ++i)
        CHECK(pair_key_tile(res.pairs[i].key) ==
              pair_key_tile(res.pairs[i - 1].key) + 1);
}

TEST_CASE("empty splat list and empty footprints") {
    const TileGrid grid = TileGrid::make(64, 64, 16);
    const RenderConfig cfg;
    const auto res = generate_pairs(std::vector<SplatView>{}, grid,
                                    Mode::Ellipse, cfg);
    CHECK(res.pairs.empty());
    // footprint entirely off-screen intersects zero tiles
    const SplatView s =
        make_splat({-500, -500}, {4, 0, 4}, 0.9f, cfg.alpha_threshold);
    CHECK(tiles_of(s, grid, Mode::Ellipse, cfg).empty());
}

TEST_CASE("the legacy fixed-radius switch shrinks high-opacity aabb footprints") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    RenderConfig cfg;
    // opacity 0.99: level-set radius 3.33 sigma exceeds the fixed 3.0
    const SplatView s =
        make_splat({320, 240}, {400, 0, 400}, 0.99f, cfg.alpha_threshold);
    const auto exact = tiles_of(s, grid, Mode::AABB, cfg);
    cfg.fixed_radius_aabb = true;
    const auto fixed = tiles_of(s, grid, Mode::AABB, cfg);
    CHECK(fixed.size() < exact.size());
    // other modes are unaffected by the switch
    cfg.fixed_radius_aabb = false;
    const auto ell_a = tiles_of(s, grid, Mode::Ellipse, cfg);
    cfg.fixed_radius_aabb = true;
    const auto ell_b = tiles_of(s, grid, Mode::Ellipse, cfg);
    CHECK(ell_a == ell_b);
}

TEST_CASE("exceeding the pair budget raises a resource error") {
    const TileGrid grid = TileGrid::make(640, 480, 16);
    RenderConfig cfg;
    cfg.pair_budget = 4;
    const SplatView s = make_splat({328, 120}, {81, 0, 2.25f}, 0.99f,
                                   cfg.alpha_threshold);
    CHECK_THROWS_AS(
        generate_pairs(std::vector<SplatView>{s}, grid, Mode::Ellipse, cfg),
        PairBudgetError);
}

TEST_CASE("pair counts shrink monotonically as K grows") {
    const SynthScene scene = synth_scene(13, 800, SynthSpec{});
    const Camera& cam = scene.cameras[0];
    const TileGrid grid = TileGrid::make(cam.width, cam.height, 16);
    TUpperLUT lut;
    lut.bins.assign(20, 0.6f);
    RenderConfig ada;
    ada.mode = Mode::AdaGScale;

    std::size_t prev = SIZE_MAX;
    for (float k : {0.0f, 0.1f, 0.5f, 2.0f, 8.0f}) {
        ada.k = k;
        const auto splats = preprocess_view(scene.gaussians, cam, ada, &lut);
        const auto res = generate_pairs(splats, grid, Mode::AdaGScale, ada);
        REQUIRE(res.pairs.size() <= prev);
        prev = res.pairs.size();
    }
}

TEST_CASE("pair generation is thread-count invariant") {
    const SynthScene scene = synth_scene(13, 500, SynthSpec{});
    const Camera& cam = scene.cameras[0];
    const TileGrid grid = TileGrid::make(cam.width, cam.height, 16);
    RenderConfig one;
    one.thread_count = 1;
    RenderConfig many;
    many.thread_count = 7;
    const auto splats = preprocess_view(scene.gaussians, cam, one);
    const auto ra = generate_pairs(splats, grid, Mode::Ellipse, one);
    const auto rb = generate_pairs(splats, grid, Mode::Ellipse, many);
    REQUIRE(ra.pairs.size() == rb.pairs.size());
    for (std::size_t i = 0; i < ra.pairs.size(); ++i) {
        CHECK(ra.pairs[i].key == rb.pairs[i].key);
        CHECK(ra.pairs[i].splat_index == rb.pairs[i].splat_index);
    }
}

}  // TEST_SUITE
