#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "adagscale/math.hpp"

namespace ags {

// World-space anisotropic Gaussian primitive. `sh` holds real spherical
// harmonics coefficients up to degree 3, coefficient-major: sh[k * 3 + c]
// for basis function k and channel c, 3 * d^2 floats total.
struct Gaussian3D {
    Vec3f mean;
    Vec3f scale;      // positive axis lengths, world units
    Quatf rotation;   // unit quaternion
    float opacity = 0.5f;  // in (0, 1)
    std::vector<float> sh{0.0f, 0.0f, 0.0f};
};

// -1 if the coefficient count does not match a supported degree.
int sh_degree(const Gaussian3D& g);

// Checks the documented invariants (quaternion norm, positive scales,
// opacity range, coefficient count). Returns an empty string when valid.
std::string validate(const Gaussian3D& g);

// Sigma = R * diag(scale)^2 * R^T, computed in double. Symmetric positive
// definite for any valid Gaussian.
Mat3d covariance_3d(const Gaussian3D& g);

struct Camera {
    Vec3f position;
    Mat3f rotation;  // world-to-camera, orthonormal
    float fx = 1.0f, fy = 1.0f;  // focal lengths, pixels
    int width = 0, height = 0;   // image dimensions, pixels
};

inline Vec3f to_camera(const Camera& cam, Vec3f world) {
    return cam.rotation * (world - cam.position);
}

// Principal point sits at the geometric image center.
inline Vec2f principal_point(const Camera& cam) {
    return {0.5f * static_cast<float>(cam.width),
            0.5f * static_cast<float>(cam.height)};
}

std::string validate(const Camera& cam);

// Max abs entry of R^T R - I.
float orthonormality_drift(const Mat3f& r);

// Nearest-orthonormal projection (Higham polar iteration). Input must be
// close to orthonormal already; callers reject anything with drift >= 1e-2.
Mat3f orthonormalize(Mat3f r);

enum class Mode { AABB, OBB, Ellipse, AdaGScale };

const char* mode_name(Mode m);
bool parse_mode(const std::string& name, Mode& out);

struct RenderConfig {
    int tile_size = 16;
    float alpha_threshold = 1.0f / 255.0f;  // tau, pair-gen and blend cutoff
    float transmittance_floor = 1e-4f;      // early-exit bound
    float alpha_clamp = 0.99f;
    float near_plane = 0.2f;
    float guard_band = 1.3f;  // frustum cull margin in NDC units
    Mode mode = Mode::Ellipse;
    float k = 0.0f;           // peripheral loss budget, AdaGScale only
    int thread_count = 0;     // 0 = hardware concurrency
    Vec3f background{0.0f, 0.0f, 0.0f};
    bool fixed_radius_aabb = false;  // legacy 3-sigma AABB footprint
    std::size_t pair_budget = std::size_t{1} << 27;
};

std::string validate(const RenderConfig& cfg);

}  // namespace ags
