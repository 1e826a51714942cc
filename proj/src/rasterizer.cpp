#include "adagscale/rasterizer.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <cmath>

#include "adagscale/parallel.hpp"

namespace ags {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

void raster_tile(std::span<const GaussianTilePair> tile_pairs,
                 std::span<const SplatView> splats, const TileGrid& grid,
                 int tile_index, const RenderConfig& cfg, Image& out,
                 std::vector<float>* max_t,
                 std::vector<BlendRecord>* contributions) {
    const int tx = tile_index % grid.tiles_x;
    const int ty = tile_index / grid.tiles_x;
    const int x0 = tx * grid.tile_size;
    const int y0 = ty * grid.tile_size;
    const int w = std::min(grid.tile_size, grid.width - x0);
    const int h = std::min(grid.tile_size, grid.height - y0);
    const int npx = w * h;
    if (npx <= 0) return;

    constexpr int kMaxTilePixels = 64 * 64;
    float trans[kMaxTilePixels];
    float rgb[kMaxTilePixels * 3];
    std::vector<float> trans_dyn, rgb_dyn;
    float* t_buf = trans;
    float* c_buf = rgb;
    if (npx > kMaxTilePixels) {
        trans_dyn.assign(npx, 1.0f);
        rgb_dyn.assign(std::size_t(npx) * 3, 0.0f);
        t_buf = trans_dyn.data();
        c_buf = rgb_dyn.data();
    } else {
        std::fill_n(t_buf, npx, 1.0f);
        std::fill_n(c_buf, npx * 3, 0.0f);
    }

    const float tau = cfg.alpha_threshold;
    const float floor = cfg.transmittance_floor;
    int active = npx;

    for (const GaussianTilePair& pair : tile_pairs) {
        if (active == 0) break;
        const SplatView& s = splats[pair.splat_index];
        for (int iy = 0; iy < h; ++iy) {
            const float py = static_cast<float>(y0 + iy) + 0.5f;
            for (int ix = 0; ix < w; ++ix) {
                const int pi = iy * w + ix;
                const float t_cur = t_buf[pi];
                if (t_cur < floor) continue;
                const float px = static_cast<float>(x0 + ix) + 0.5f;
                const float a = alpha_at(s, {px, py}, cfg.alpha_clamp);
                if (a < tau) continue;

                if (max_t) {
                    float& m = (*max_t)[pair.splat_index];
                    if (t_cur > m) m = t_cur;
                }
                const float weight = a * t_cur;
                if (contributions)
                    contributions->push_back(
                        {static_cast<std::uint32_t>((y0 + iy) * grid.width +
                                                    (x0 + ix)),
                         pair.splat_index, a, weight});

                c_buf[pi * 3 + 0] += weight * s.rgb.x;
                c_buf[pi * 3 + 1] += weight * s.rgb.y;
                c_buf[pi * 3 + 2] += weight * s.rgb.z;
                const float t_next = t_cur * (1.0f - a);
                t_buf[pi] = t_next;
                if (t_next < floor) --active;
            }
        }
    }

    for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix) {
            const int pi = iy * w + ix;
            const float t_final = t_buf[pi];
            out.at(x0 + ix, y0 + iy, 0) = std::clamp(
                c_buf[pi * 3 + 0] + t_final * cfg.background.x, 0.0f, 1.0f);
            out.at(x0 + ix, y0 + iy, 1) = std::clamp(
                c_buf[pi * 3 + 1] + t_final * cfg.background.y, 0.0f, 1.0f);
            out.at(x0 + ix, y0 + iy, 2) = std::clamp(
                c_buf[pi * 3 + 2] + t_final * cfg.background.z, 0.0f, 1.0f);
        }
}

RenderReport render(std::span<const Gaussian3D> scene, const Camera& cam,
                    const RenderConfig& cfg, const TUpperLUT* lut,
                    const RecordOptions& rec) {
    if (const std::string bad = validate(cfg); !bad.empty())
        throw std::invalid_argument("render: " + bad);
    if (const std::string bad = validate(cam); !bad.empty())
        throw std::invalid_argument("render: " + bad);

    RenderReport report;
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<SplatView> splats = preprocess_view(scene, cam, cfg, lut);
    report.stage_times["preprocess"] = seconds_since(t0);
    report.splat_count = splats.size();

    const TileGrid grid = TileGrid::make(cam.width, cam.height, cfg.tile_size);

    t0 = std::chrono::steady_clock::now();
    PairGenResult gen = generate_pairs(splats, grid, cfg.mode, cfg);
    report.stage_times["pair_gen"] = seconds_since(t0);
    report.pair_count = gen.pairs.size();

    t0 = std::chrono::steady_clock::now();
    const SortedPairs sorted = sort_pairs(std::move(gen.pairs), grid.tile_count());
    report.stage_times["sort"] = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    report.image = Image(cam.width, cam.height);

    const int workers = resolve_threads(cfg.thread_count);
    std::vector<std::vector<float>> max_t_by_worker;
    if (rec.max_t)
        max_t_by_worker.assign(workers, std::vector<float>(splats.size(), 0.0f));
    std::vector<std::vector<BlendRecord>> contrib_by_tile;
    if (rec.contributions) contrib_by_tile.resize(grid.tile_count());

    parallel_items(
        static_cast<std::size_t>(grid.tile_count()), cfg.thread_count,
        [&](std::size_t tile, int worker) {
            const auto [begin, end] = sorted.ranges[tile];
            raster_tile(
                std::span<const GaussianTilePair>(sorted.pairs.data() + begin,
                                                  end - begin),
                splats, grid, static_cast<int>(tile), cfg, report.image,
                rec.max_t ? &max_t_by_worker[worker] : nullptr,
                rec.contributions ? &contrib_by_tile[tile] : nullptr);
        });

    if (rec.max_t) {
        report.max_t.assign(splats.size(), 0.0f);
        for (const auto& local : max_t_by_worker)
            for (std::size_t i = 0; i < local.size(); ++i)
                report.max_t[i] = std::max(report.max_t[i], local[i]);
    }
    if (rec.contributions) {
        std::size_t total = 0;
        for (const auto& v : contrib_by_tile) total += v.size();
        report.contributions.reserve(total);
        for (const auto& v : contrib_by_tile)
            report.contributions.insert(report.contributions.end(), v.begin(),
                                        v.end());
    }
    report.stage_times["raster"] = seconds_since(t0);
    return report;
}

}  // namespace ags
