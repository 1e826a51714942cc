#include "adagscale/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "adagscale/calibrate.hpp"
#include "adagscale/parallel.hpp"

namespace ags {

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: image dimensions differ");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.data.size());
    return 10.0 * std::log10(1.0 / mse);
}

double psnr_capped(const Image& a, const Image& b) {
    return std::min(psnr(a, b), kPsnrCap);
}

const char* ordering_name(SkipOrdering o) {
    switch (o) {
        case SkipOrdering::Exact: return "exact";
        case SkipOrdering::MaxT: return "maxt";
        case SkipOrdering::TUpper: return "tupper";
    }
    return "?";
}

bool parse_ordering(const std::string& name, SkipOrdering& out) {
    if (name == "exact") out = SkipOrdering::Exact;
    else if (name == "maxt") out = SkipOrdering::MaxT;
    else if (name == "tupper") out = SkipOrdering::TUpper;
    else return false;
    return true;
}

namespace {

float blend_metric(SkipOrdering ordering, float alpha, float t_ref,
                   float max_t, float t_upper) {
    switch (ordering) {
        case SkipOrdering::Exact: return alpha * t_ref;
        case SkipOrdering::MaxT: return max_t * alpha;
        case SkipOrdering::TUpper: return t_upper * alpha;
    }
    return 0.0f;
}

// Re-render with low-metric blends dropped. A shadow transmittance that
// decays on every blended-or-skipped splat reproduces the unskipped render's
// T at each event, so the Exact metric matches pass 1 without any lookup and
// the skip set is nested across thresholds.
Image render_with_skip(std::span<const SplatView> splats,
                       const SortedPairs& sorted, const TileGrid& grid,
                       const RenderConfig& cfg, SkipOrdering ordering,
                       float threshold, std::span<const float> max_t,
                       const TUpperLUT* lut) {
    Image out(grid.width, grid.height);
    const float tau = cfg.alpha_threshold;
    const float floor_t = cfg.transmittance_floor;

    parallel_items(
        static_cast<std::size_t>(grid.tile_count()), cfg.thread_count,
        [&](std::size_t tile, int) {
            const int tx = static_cast<int>(tile) % grid.tiles_x;
            const int ty = static_cast<int>(tile) / grid.tiles_x;
            const int x0 = tx * grid.tile_size;
            const int y0 = ty * grid.tile_size;
            const int w = std::min(grid.tile_size, grid.width - x0);
            const int h = std::min(grid.tile_size, grid.height - y0);
            if (w <= 0 || h <= 0) return;
            const int npx = w * h;

            std::vector<float> t_buf(npx, 1.0f);
            std::vector<float> t_ref(npx, 1.0f);
            std::vector<float> c_buf(std::size_t(npx) * 3, 0.0f);
            int active = npx;

            const auto [begin, end] = sorted.ranges[tile];
            for (std::uint32_t p = begin; p < end && active > 0; ++p) {
                const auto& pair = sorted.pairs[p];
                const SplatView& s = splats[pair.splat_index];
                const float t_upper = lut ? lut->value_at(s.depth) : 1.0f;
                const float mt = max_t.empty() ? 1.0f : max_t[pair.splat_index];
                for (int iy = 0; iy < h; ++iy) {
                    const float py = static_cast<float>(y0 + iy) + 0.5f;
                    for (int ix = 0; ix < w; ++ix) {
                        const int pi = iy * w + ix;
                        if (t_buf[pi] < floor_t) continue;
                        const float px = static_cast<float>(x0 + ix) + 0.5f;
                        const float a = alpha_at(s, {px, py}, cfg.alpha_clamp);
                        if (a < tau) continue;
                        const float metric =
                            blend_metric(ordering, a, t_ref[pi], mt, t_upper);
                        if (metric >= threshold) {
                            const float weight = a * t_buf[pi];
                            c_buf[pi * 3 + 0] += weight * s.rgb.x;
                            c_buf[pi * 3 + 1] += weight * s.rgb.y;
                            c_buf[pi * 3 + 2] += weight * s.rgb.z;
                            const float t_next = t_buf[pi] * (1.0f - a);
                            t_buf[pi] = t_next;
                            if (t_next < floor_t) --active;
                        }
                        t_ref[pi] *= (1.0f - a);
                    }
                }
            }
            for (int iy = 0; iy < h; ++iy)
                for (int ix = 0; ix < w; ++ix) {
                    const int pi = iy * w + ix;
                    out.at(x0 + ix, y0 + iy, 0) = std::clamp(
                        c_buf[pi * 3 + 0] + t_buf[pi] * cfg.background.x, 0.0f,
                        1.0f);
                    out.at(x0 + ix, y0 + iy, 1) = std::clamp(
                        c_buf[pi * 3 + 1] + t_buf[pi] * cfg.background.y, 0.0f,
                        1.0f);
                    out.at(x0 + ix, y0 + iy, 2) = std::clamp(
                        c_buf[pi * 3 + 2] + t_buf[pi] * cfg.background.z, 0.0f,
                        1.0f);
                }
        });
    return out;
}

float quantile_threshold(std::vector<float> metrics, double fraction) {
    if (fraction <= 0.0) return -std::numeric_limits<float>::infinity();
    if (fraction >= 1.0) return std::numeric_limits<float>::infinity();
    if (metrics.empty()) return -std::numeric_limits<float>::infinity();
    std::sort(metrics.begin(), metrics.end());
    const std::size_t idx = static_cast<std::size_t>(
        fraction * static_cast<double>(metrics.size()));
    return metrics[std::min(idx, metrics.size() - 1)];
}

}  // namespace

std::vector<SkipRow> skip_experiment(std::span<const Gaussian3D> scene,
                                     std::span<const Camera> views,
                                     std::span<const double> fractions,
                                     std::span<const SkipOrdering> orderings,
                                     const RenderConfig& cfg,
                                     const TUpperLUT* lut) {
    RenderConfig lossless = cfg;
    lossless.mode = Mode::Ellipse;

    TUpperLUT built;
    bool needs_lut = std::any_of(
        orderings.begin(), orderings.end(),
        [](SkipOrdering o) { return o == SkipOrdering::TUpper; });
    if (needs_lut && lut == nullptr) {
        built = build_lut(scene, views, lossless);
        lut = &built;
    }

    // psnr accumulators indexed [ordering][fraction]
    std::vector<std::vector<double>> acc(
        orderings.size(), std::vector<double>(fractions.size(), 0.0));

    for (const Camera& cam : views) {
        RecordOptions rec;
        rec.max_t = true;
        rec.contributions = true;
        const RenderReport pass1 = render(scene, cam, lossless, nullptr, rec);

        const std::vector<SplatView> splats =
            preprocess_view(scene, cam, lossless);
        const TileGrid grid =
            TileGrid::make(cam.width, cam.height, cfg.tile_size);
        PairGenResult gen = generate_pairs(splats, grid, Mode::Ellipse, lossless);
        const SortedPairs sorted =
            sort_pairs(std::move(gen.pairs), grid.tile_count());

        for (std::size_t oi = 0; oi < orderings.size(); ++oi) {
            const SkipOrdering ordering = orderings[oi];
            std::vector<float> metrics;
            metrics.reserve(pass1.contributions.size());
            for (const BlendRecord& r : pass1.contributions) {
                const float t_upper =
                    lut ? lut->value_at(splats[r.splat].depth) : 1.0f;
                metrics.push_back(blend_metric(ordering, r.alpha,
                                               r.weight / r.alpha,
                                               pass1.max_t[r.splat], t_upper));
            }
            for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
                const float threshold =
                    quantile_threshold(metrics, fractions[fi]);
                const Image skipped =
                    render_with_skip(splats, sorted, grid, lossless, ordering,
                                     threshold, pass1.max_t, lut);
                acc[oi][fi] += psnr_capped(skipped, pass1.image);
            }
        }
    }

    std::vector<SkipRow> rows;
    for (std::size_t oi = 0; oi < orderings.size(); ++oi)
        for (std::size_t fi = 0; fi < fractions.size(); ++fi)
            rows.push_back({orderings[oi], fractions[fi],
                            acc[oi][fi] / static_cast<double>(views.size())});
    return rows;
}

std::vector<ProfileBin> contribution_profile(std::span<const Gaussian3D> scene,
                                             std::span<const Camera> views,
                                             const RenderConfig& cfg) {
    RenderConfig lossless = cfg;
    lossless.mode = Mode::Ellipse;
    constexpr int kBins = 20;
    const double r_max =
        std::sqrt(2.0 * std::log(1.0 / cfg.alpha_threshold));

    std::vector<double> sums(kBins, 0.0);
    std::vector<std::size_t> counts(kBins, 0);
    bool any = false;

    for (const Camera& cam : views) {
        RecordOptions rec;
        rec.contributions = true;
        const RenderReport rep = render(scene, cam, lossless, nullptr, rec);
        const std::vector<SplatView> splats =
            preprocess_view(scene, cam, lossless);
        for (const BlendRecord& r : rep.contributions) {
            const SplatView& s = splats[r.splat];
            const int px = static_cast<int>(r.pixel % cam.width);
            const int py = static_cast<int>(r.pixel / cam.width);
            const Vec2f d{static_cast<float>(px) + 0.5f - s.mean2d.x,
                          static_cast<float>(py) + 0.5f - s.mean2d.y};
            const double m = std::sqrt(static_cast<double>(s.inv_cov.quad(d)));
            int b = static_cast<int>(m / r_max * kBins);
            b = std::clamp(b, 0, kBins - 1);
            sums[b] += r.weight;
            ++counts[b];
            any = true;
        }
    }
    if (!any) return {};

    std::vector<ProfileBin> bins;
    bins.reserve(kBins);
    for (int b = 0; b < kBins; ++b)
        bins.push_back({(b + 0.5) / kBins,
                        counts[b] ? sums[b] / static_cast<double>(counts[b])
                                  : 0.0,
                        counts[b]});
    return bins;
}

std::vector<PairReportRow> pair_report(std::span<const Gaussian3D> scene,
                                       std::span<const Camera> views,
                                       std::span<const ReportSpec> specs,
                                       const RenderConfig& cfg,
                                       const TUpperLUT* lut) {
    RenderConfig lossless = cfg;
    lossless.mode = Mode::Ellipse;

    TUpperLUT built;
    const bool needs_lut =
        std::any_of(specs.begin(), specs.end(), [](const ReportSpec& s) {
            return s.mode == Mode::AdaGScale;
        });
    if (needs_lut && lut == nullptr) {
        built = build_lut(scene, views, lossless);
        lut = &built;
    }

    std::vector<Image> refs;
    std::vector<std::size_t> ref_pairs;
    for (const Camera& cam : views) {
        RenderReport rep = render(scene, cam, lossless);
        ref_pairs.push_back(rep.pair_count);
        refs.push_back(std::move(rep.image));
    }

    std::vector<PairReportRow> rows;
    for (const ReportSpec& spec : specs) {
        RenderConfig run = cfg;
        run.mode = spec.mode;
        run.k = static_cast<float>(spec.k);
        PairReportRow row{};
        row.mode = mode_name(spec.mode);
        row.k = spec.mode == Mode::AdaGScale ? spec.k : 0.0;
        double reduction = 0.0, drop = 0.0;
        for (std::size_t v = 0; v < views.size(); ++v) {
            const RenderReport rep = render(
                scene, views[v], run,
                spec.mode == Mode::AdaGScale ? lut : nullptr);
            row.pair_count += rep.pair_count;
            reduction += 100.0 * (1.0 - static_cast<double>(rep.pair_count) /
                                            static_cast<double>(ref_pairs[v]));
            drop += kPsnrCap - psnr_capped(rep.image, refs[v]);
            row.t_preprocess += rep.stage_times.at("preprocess");
            row.t_pair_gen += rep.stage_times.at("pair_gen");
            row.t_sort += rep.stage_times.at("sort");
            row.t_raster += rep.stage_times.at("raster");
        }
        row.reduction_pct = reduction / static_cast<double>(views.size());
        row.psnr_drop_db = drop / static_cast<double>(views.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string skip_rows_csv(std::span<const SkipRow> rows) {
    std::string out = "ordering,fraction,psnr_db\n";
    for (const auto& r : rows) {
        out += ordering_name(r.ordering);
        out += ',';
        out += format_double(r.fraction);
        out += ',';
        out += format_double(r.psnr_db);
        out += '\n';
    }
    return out;
}

std::string profile_csv(std::span<const ProfileBin> bins) {
    std::string out = "normalized_distance,mean_contribution,count\n";
    for (const auto& b : bins) {
        out += format_double(b.normalized_distance);
        out += ',';
        out += format_double(b.mean_contribution);
        out += ',';
        out += std::to_string(b.count);
        out += '\n';
    }
    return out;
}

std::string pair_report_csv(std::span<const PairReportRow> rows) {
    std::string out =
        "mode,k,pair_count,reduction_vs_ellipse_pct,psnr_drop_db,"
        "preprocess_s,pair_gen_s,sort_s,raster_s\n";
    for (const auto& r : rows) {
        out += r.mode;
        out += ',';
        out += format_double(r.k);
        out += ',';
        out += std::to_string(r.pair_count);
        out += ',';
        out += format_double(r.reduction_pct);
        out += ',';
        out += format_double(r.psnr_drop_db);
        out += ',';
        out += format_double(r.t_preprocess);
        out += ',';
        out += format_double(r.t_pair_gen);
        out += ',';
        out += format_double(r.t_sort);
        out += ',';
        out += format_double(r.t_raster);
        out += '\n';
    }
    return out;
}

}  // namespace ags
