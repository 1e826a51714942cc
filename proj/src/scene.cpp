#include "adagscale/scene.hpp"

#include <cmath>

namespace ags {

int sh_degree(const Gaussian3D& g) {
    for (int d = 1; d <= 4; ++d) {
        if (g.sh.size() == static_cast<std::size_t>(3 * d * d)) return d - 1;
    }
    return -1;
}

std::string validate(const Gaussian3D& g) {
    if (std::abs(g.rotation.norm() - 1.0f) > 1e-6f)
        return "rotation quaternion is not unit length";
    if (!(g.scale.x > 0.0f && g.scale.y > 0.0f && g.scale.z > 0.0f))
        return "scale components must be strictly positive";
    if (!(g.opacity > 0.0f && g.opacity < 1.0f))
        return "opacity must lie in (0, 1)";
    if (sh_degree(g) < 0)
        return "sh coefficient count must be 3*d^2 for d in {1,2,3,4}";
    for (float v : g.sh)
        if (!std::isfinite(v)) return "sh coefficients must be finite";
    if (!(std::isfinite(g.mean.x) && std::isfinite(g.mean.y) &&
          std::isfinite(g.mean.z)))
        return "mean must be finite";
    return {};
}

Mat3d covariance_3d(const Gaussian3D& g) {
    Mat3d rs = g.rotation.rotation_matrix<double>();  // R * diag(scale)
    for (int row = 0; row < 3; ++row) {
        rs(row, 0) *= g.scale.x;
        rs(row, 1) *= g.scale.y;
        rs(row, 2) *= g.scale.z;
    }
    return rs * rs.transposed();
}

std::string validate(const Camera& cam) {
    if (orthonormality_drift(cam.rotation) > 1e-5f)
        return "camera rotation is not orthonormal";
    if (!(cam.fx > 0.0f && cam.fy > 0.0f)) return "focal lengths must be positive";
    if (!(cam.width > 0 && cam.height > 0))
        return "image dimensions must be positive";
    return {};
}

float orthonormality_drift(const Mat3f& r) {
    const Mat3f g = r.transposed() * r;
    float drift = 0.0f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const float target = (i == j) ? 1.0f : 0.0f;
            drift = std::max(drift, std::abs(g(i, j) - target));
        }
    return drift;
}

namespace {

Mat3f inverse(const Mat3f& a) {
    const float c00 = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    const float c01 = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    const float c02 = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    const float det = a(0, 0) * c00 + a(0, 1) * c01 + a(0, 2) * c02;
    const float inv_det = 1.0f / det;
    Mat3f out;
    out(0, 0) = c00 * inv_det;
    out(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv_det;
    out(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv_det;
    out(1, 0) = c01 * inv_det;
    out(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv_det;
    out(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv_det;
    out(2, 0) = c02 * inv_det;
    out(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv_det;
    out(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv_det;
    return out;
}

}  // namespace

Mat3f orthonormalize(Mat3f r) {
    // X <- (X + X^-T) / 2 converges quadratically to the polar factor.
    for (int it = 0; it < 20; ++it) {
        if (orthonormality_drift(r) <= 1e-7f) break;
        const Mat3f inv_t = inverse(r).transposed();
        for (int i = 0; i < 9; ++i) r.m[i] = 0.5f * (r.m[i] + inv_t.m[i]);
    }
    return r;
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::AABB: return "aabb";
        case Mode::OBB: return "obb";
        case Mode::Ellipse: return "ellipse";
        case Mode::AdaGScale: return "adagscale";
    }
    return "?";
}

bool parse_mode(const std::string& name, Mode& out) {
    if (name == "aabb") out = Mode::AABB;
    else if (name == "obb") out = Mode::OBB;
    else if (name == "ellipse") out = Mode::Ellipse;
    else if (name == "adagscale") out = Mode::AdaGScale;
    else return false;
    return true;
}

std::string validate(const RenderConfig& cfg) {
    if (!(cfg.alpha_threshold > 0.0f && cfg.alpha_threshold < cfg.alpha_clamp &&
          cfg.alpha_clamp <= 1.0f))
        return "require 0 < alpha_threshold < alpha_clamp <= 1";
    if (!(cfg.transmittance_floor > 0.0f))
        return "transmittance_floor must be positive";
    if (cfg.tile_size < 1) return "tile_size must be >= 1";
    if (cfg.k < 0.0f) return "k must be >= 0";
    if (!(cfg.near_plane > 0.0f)) return "near_plane must be positive";
    return {};
}

}  // namespace ags
