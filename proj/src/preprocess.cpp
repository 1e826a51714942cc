#include "adagscale/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "adagscale/parallel.hpp"

namespace ags {

namespace {

constexpr float kShC0 = 0.28209479177387814f;
constexpr float kShC1 = 0.4886025119029199f;
constexpr float kShC2[5] = {1.0925484305920792f, -1.0925484305920792f,
                            0.31539156525252005f, -1.0925484305920792f,
                            0.5462742152960396f};
constexpr float kShC3[7] = {-0.5900435899266435f, 2.890611442640554f,
                            -0.4570457994644658f, 0.3731763325901154f,
                            -0.4570457994644658f, 1.445305721320277f,
                            -0.5900435899266435f};

}  // namespace

std::optional<Projection> project(const Gaussian3D& g, const Camera& cam,
                                  const RenderConfig& cfg) {
    const Vec3f t = to_camera(cam, g.mean);
    if (t.z <= cfg.near_plane) return std::nullopt;

    const Vec2f pp = principal_point(cam);
    const float inv_z = 1.0f / t.z;
    const Vec2f mean2d{cam.fx * t.x * inv_z + pp.x,
                       cam.fy * t.y * inv_z + pp.y};

    // Guard-band cull on the projected center in NDC.
    const float ndc_x = (mean2d.x - pp.x) / pp.x;
    const float ndc_y = (mean2d.y - pp.y) / pp.y;
    if (std::abs(ndc_x) > cfg.guard_band || std::abs(ndc_y) > cfg.guard_band)
        return std::nullopt;

    // Jacobian of the perspective projection at the (clamped) camera-space
    // point; the clamp keeps the linearization sane near the guard band.
    const double iz = 1.0 / static_cast<double>(t.z);
    const double lim_x = cfg.guard_band * 0.5 * cam.width / cam.fx;
    const double lim_y = cfg.guard_band * 0.5 * cam.height / cam.fy;
    const double tx = std::clamp(t.x * iz, -lim_x, lim_x) * t.z;
    const double ty = std::clamp(t.y * iz, -lim_y, lim_y) * t.z;

    Mat3d j;
    j(0, 0) = cam.fx * iz;
    j(0, 1) = 0.0;
    j(0, 2) = -cam.fx * tx * iz * iz;
    j(1, 0) = 0.0;
    j(1, 1) = cam.fy * iz;
    j(1, 2) = -cam.fy * ty * iz * iz;
    j(2, 0) = j(2, 1) = j(2, 2) = 0.0;

    const Mat3d jw = j * cam.rotation.cast<double>();
    const Mat3d sigma = jw * covariance_3d(g) * jw.transposed();

    SymMat2 cov2d{static_cast<float>(sigma(0, 0) + 0.3),
                  static_cast<float>(sigma(0, 1)),
                  static_cast<float>(sigma(1, 1) + 0.3)};
    return Projection{mean2d, cov2d, t.z};
}

Vec3f eval_color(const Gaussian3D& g, Vec3f dir) {
    const float* sh = g.sh.data();
    const int deg = sh_degree(g);
    float r = kShC0 * sh[0];
    float gr = kShC0 * sh[1];
    float b = kShC0 * sh[2];
    if (deg > 0) {
        const float x = dir.x, y = dir.y, z = dir.z;
        auto acc = [&](float w, int k) {
            r += w * sh[k * 3 + 0];
            gr += w * sh[k * 3 + 1];
            b += w * sh[k * 3 + 2];
        };
        acc(-kShC1 * y, 1);
        acc(kShC1 * z, 2);
        acc(-kShC1 * x, 3);
        if (deg > 1) {
            const float xx = x * x, yy = y * y, zz = z * z;
            const float xy = x * y, yz = y * z, xz = x * z;
            acc(kShC2[0] * xy, 4);
            acc(kShC2[1] * yz, 5);
            acc(kShC2[2] * (2.0f * zz - xx - yy), 6);
            acc(kShC2[3] * xz, 7);
            acc(kShC2[4] * (xx - yy), 8);
            if (deg > 2) {
                acc(kShC3[0] * y * (3.0f * xx - yy), 9);
                acc(kShC3[1] * xy * z, 10);
                acc(kShC3[2] * y * (4.0f * zz - xx - yy), 11);
                acc(kShC3[3] * z * (2.0f * zz - 3.0f * xx - 3.0f * yy), 12);
                acc(kShC3[4] * x * (4.0f * zz - xx - yy), 13);
                acc(kShC3[5] * z * (xx - yy), 14);
                acc(kShC3[6] * x * (xx - 3.0f * yy), 15);
            }
        }
    }
    auto clamp01 = [](float v) { return std::clamp(v + 0.5f, 0.0f, 1.0f); };
    return {clamp01(r), clamp01(gr), clamp01(b)};
}

float compute_th(const SymMat2& cov2d, float depth, const TUpperLUT& lut,
                 float k, float tau) {
    const float det = cov2d.det();
    if (!(det > 0.0f))
        throw std::invalid_argument("compute_th: non-positive determinant");
    const float t_upper = lut.value_at(depth);
    const float denom =
        t_upper * 2.0f * std::numbers::pi_v<float> * std::sqrt(det);
    return k / denom + tau;
}

std::vector<SplatView> preprocess_view(std::span<const Gaussian3D> scene,
                                       const Camera& cam,
                                       const RenderConfig& cfg,
                                       const TUpperLUT* lut) {
    const bool adaptive = cfg.mode == Mode::AdaGScale;
    if (adaptive && lut == nullptr)
        throw std::invalid_argument(
            "preprocess_view: adagscale mode requires a T-upper LUT");

    const float tau = cfg.alpha_threshold;
    std::vector<SplatView> slots(scene.size());
    std::vector<std::uint8_t> alive(scene.size(), 0);

    parallel_chunks(scene.size(), cfg.thread_count,
                    [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Gaussian3D& g = scene[i];
            const auto proj = project(g, cam, cfg);
            if (!proj) continue;
            if (!(proj->cov2d.det() > 0.0f)) continue;

            float th = tau;
            if (adaptive)
                th = compute_th(proj->cov2d, proj->depth, *lut, cfg.k, tau);
            if (th >= g.opacity) continue;  // negligible for this viewpoint

            SplatView s;
            s.mean2d = proj->mean2d;
            s.cov2d = proj->cov2d;
            s.inv_cov = proj->cov2d.inverse();
            s.depth = proj->depth;
            s.rgb = eval_color(g, (g.mean - cam.position).normalized());
            s.opacity = g.opacity;
            s.th = th;
            s.source_id = static_cast<std::uint32_t>(i);
            slots[i] = s;
            alive[i] = 1;
        }
    });

    std::vector<SplatView> out;
    out.reserve(scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i)
        if (alive[i]) out.push_back(slots[i]);
    return out;
}

}  // namespace ags
