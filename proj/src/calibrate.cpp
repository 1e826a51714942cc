#include "adagscale/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "adagscale/analysis.hpp"

namespace ags {

TUpperLUT build_lut(std::span<const Gaussian3D> scene,
                    std::span<const Camera> calib_views,
                    const RenderConfig& cfg) {
    TUpperLUT lut;
    std::vector<bool> observed(lut.bins.size(), false);
    std::vector<float> folded(lut.bins.size(), 0.0f);

    RenderConfig lossless = cfg;
    lossless.mode = Mode::Ellipse;
    RecordOptions rec;
    rec.max_t = true;

    for (const Camera& cam : calib_views) {
        const std::vector<SplatView> splats =
            preprocess_view(scene, cam, lossless);
        const RenderReport rep = render(scene, cam, lossless, nullptr, rec);
        for (std::size_t i = 0; i < splats.size(); ++i) {
            const float mt = rep.max_t[i];
            if (mt <= 0.0f) continue;  // never blended in this view
            const int b = lut.bin_index(splats[i].depth);
            observed[b] = true;
            folded[b] = std::max(folded[b], mt);
        }
    }
    for (std::size_t b = 0; b < lut.bins.size(); ++b)
        if (observed[b]) lut.bins[b] = folded[b];
    return lut;
}

double peripheral_score_exact(const SplatView& s, float x, float t_const,
                              const TileGrid& grid, float tau) {
    // Pixels with alpha >= tau all lie within the tau level set; iterating
    // its bounding box is equivalent to scanning the whole grid.
    if (!(s.opacity > tau)) return 0.0;
    const float r = std::sqrt(2.0f * std::log(s.opacity / tau));
    const float ext_x = r * std::sqrt(std::max(s.cov2d.xx, 0.0f));
    const float ext_y = r * std::sqrt(std::max(s.cov2d.yy, 0.0f));
    const int x0 = std::max(0, static_cast<int>(std::floor(s.mean2d.x - ext_x)));
    const int x1 = std::min(grid.width - 1,
                            static_cast<int>(std::ceil(s.mean2d.x + ext_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(s.mean2d.y - ext_y)));
    const int y1 = std::min(grid.height - 1,
                            static_cast<int>(std::ceil(s.mean2d.y + ext_y)));

    double sum = 0.0;
    for (int py = y0; py <= y1; ++py)
        for (int px = x0; px <= x1; ++px) {
            const Vec2f d{static_cast<float>(px) + 0.5f - s.mean2d.x,
                          static_cast<float>(py) + 0.5f - s.mean2d.y};
            const float a = s.opacity * std::exp(-0.5f * s.inv_cov.quad(d));
            if (a >= tau && a < x) sum += a;
        }
    return t_const * sum;
}

double peripheral_score_closed(const SymMat2& cov2d, float x, float t_const,
                               float tau) {
    return static_cast<double>(t_const) * 2.0 * std::numbers::pi *
           std::sqrt(static_cast<double>(cov2d.det())) *
           (static_cast<double>(x) - static_cast<double>(tau));
}

double mean_psnr_drop(std::span<const Gaussian3D> scene,
                      std::span<const Camera> views,
                      std::span<const Image> references, double k,
                      const RenderConfig& cfg, const TUpperLUT& lut,
                      bool worst_case) {
    RenderConfig adaptive = cfg;
    adaptive.mode = Mode::AdaGScale;
    adaptive.k = static_cast<float>(k);
    double acc = 0.0;
    for (std::size_t v = 0; v < views.size(); ++v) {
        const RenderReport rep = render(scene, views[v], adaptive, &lut);
        const double drop = kPsnrCap - psnr_capped(rep.image, references[v]);
        acc = worst_case ? std::max(acc, drop) : acc + drop;
    }
    return worst_case ? acc : acc / static_cast<double>(views.size());
}

CalibrationResult search_k(std::span<const Gaussian3D> scene,
                           std::span<const Camera> calib_views,
                           double target_drop, const RenderConfig& cfg,
                           const TUpperLUT& lut, bool worst_case) {
    if (calib_views.empty())
        throw std::invalid_argument("search_k: no calibration views");

    CalibrationResult result;
    result.lut = lut;
    result.target_drop = target_drop;
    for (std::size_t v = 0; v < calib_views.size(); ++v)
        result.calib_view_ids.push_back(static_cast<int>(v));

    if (target_drop <= 0.0) return result;  // K = 0 is exactly lossless

    RenderConfig lossless = cfg;
    lossless.mode = Mode::Ellipse;
    std::vector<Image> refs;
    refs.reserve(calib_views.size());
    for (const Camera& cam : calib_views)
        refs.push_back(render(scene, cam, lossless).image);

    auto drop_at = [&](double k) {
        ++result.iterations;
        return mean_psnr_drop(scene, calib_views, refs, k, cfg, lut,
                              worst_case);
    };

    // K = 0 must reproduce the references exactly.
    if (drop_at(0.0) != 0.0)
        throw std::logic_error(
            "search_k: K=0 render differs from the lossless reference");

    double k_lo = 0.0;        // largest K seen with drop <= target
    double k_hi = 1.0;
    double best_drop = 0.0;
    bool bounded = false;
    for (int d = 0; d < 40; ++d) {
        const double drop = drop_at(k_hi);
        if (drop > target_drop) {
            bounded = true;
            break;
        }
        k_lo = k_hi;
        best_drop = drop;
        k_hi *= 2.0;
    }
    if (bounded) {
        for (int step = 0; step < 20; ++step) {
            const double mid = 0.5 * (k_lo + k_hi);
            const double drop = drop_at(mid);
            if (drop <= target_drop) {
                k_lo = mid;
                best_drop = drop;
            } else {
                k_hi = mid;
            }
        }
    }
    result.k = k_lo;
    result.achieved_drop = best_drop;
    return result;
}

std::string calibration_to_json(const CalibrationResult& r) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["target_drop"] = r.target_drop;
    j["achieved_drop"] = r.achieved_drop;
    j["iterations"] = r.iterations;
    j["lut"]["depth_min"] = r.lut.depth_min;
    j["lut"]["depth_max"] = r.lut.depth_max;
    j["lut"]["bins"] = r.lut.bins;
    j["calib_view_ids"] = r.calib_view_ids;
    return j.dump(2) + "\n";
}

CalibrationResult calibration_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        CalibrationResult r;
        r.k = j.at("k").get<double>();
        r.target_drop = j.at("target_drop").get<double>();
        r.achieved_drop = j.at("achieved_drop").get<double>();
        r.iterations = j.value("iterations", 0);
        r.lut.depth_min = j.at("lut").at("depth_min").get<float>();
        r.lut.depth_max = j.at("lut").at("depth_max").get<float>();
        r.lut.bins = j.at("lut").at("bins").get<std::vector<float>>();
        r.calib_view_ids =
            j.value("calib_view_ids", std::vector<int>{});
        if (r.lut.bins.empty())
            throw std::runtime_error("calibration json: empty lut bins");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("calibration json: ") + e.what());
    }
}

}  // namespace ags
