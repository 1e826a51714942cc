#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adagscale/lut.hpp"
#include "adagscale/scene.hpp"

namespace ags {

// Per-viewpoint projected form of a Gaussian. Only constructed for splats
// that survive culling and threshold exclusion, so th < opacity always holds.
struct SplatView {
    Vec2f mean2d;      // pixel units
    SymMat2 cov2d;     // projected covariance, dilation included
    SymMat2 inv_cov;
    float depth;       // camera-space z
    Vec3f rgb;         // SH evaluated for this view, in [0,1]
    float opacity;
    float th;          // effective alpha threshold for pair generation
    std::uint32_t source_id;
};

struct Projection {
    Vec2f mean2d;
    SymMat2 cov2d;
    float depth;
};

// EWA-style perspective projection of one Gaussian. Empty when the splat is
// behind the near plane or its center is outside the guard band. The returned
// covariance carries the +0.3 diagonal dilation.
std::optional<Projection> project(const Gaussian3D& g, const Camera& cam,
                                  const RenderConfig& cfg);

// Real SH evaluation up to degree 3, +0.5 offset, clamped to [0,1].
// view_dir must be normalized.
Vec3f eval_color(const Gaussian3D& g, Vec3f view_dir);

// Adjusted alpha threshold: K / (T_upper(depth) * 2*pi*sqrt(det(cov2d))) + tau.
// Always >= tau. Throws std::invalid_argument on a non-positive determinant.
float compute_th(const SymMat2& cov2d, float depth, const TUpperLUT& lut,
                 float k, float tau);

// Projects, colors, and thresholds every Gaussian of the scene for one view.
// Output preserves input order and contains exactly the survivors. In
// AdaGScale mode `lut` must be non-null; splats with th >= opacity are
// dropped. Deterministic for any thread count.
std::vector<SplatView> preprocess_view(std::span<const Gaussian3D> scene,
                                       const Camera& cam,
                                       const RenderConfig& cfg,
                                       const TUpperLUT* lut = nullptr);

}  // namespace ags
