#pragma once

#include <span>
#include <string>
#include <vector>

#include "adagscale/lut.hpp"
#include "adagscale/pair_gen.hpp"
#include "adagscale/preprocess.hpp"
#include "adagscale/rasterizer.hpp"
#include "adagscale/scene.hpp"

namespace ags {

// Renders every calibration view losslessly with max-transmittance
// instrumentation and folds each Gaussian's per-view maximum into its depth
// bin. Bins nothing ever landed in stay at 1.0.
TUpperLUT build_lut(std::span<const Gaussian3D> scene,
                    std::span<const Camera> calib_views,
                    const RenderConfig& cfg);

// Discrete oracle for the closed-form score: t_const * sum of alpha over the
// image's pixel centers where tau <= alpha < x.
double peripheral_score_exact(const SplatView& s, float x, float t_const,
                              const TileGrid& grid,
                              float tau = 1.0f / 255.0f);

// t_const * 2*pi*sqrt(det(cov2d)) * (x - tau). Linear in (x - tau) and
// independent of opacity.
double peripheral_score_closed(const SymMat2& cov2d, float x, float t_const,
                               float tau);

struct CalibrationResult {
    double k = 0.0;
    TUpperLUT lut;
    double target_drop = 0.0;    // dB
    double achieved_drop = 0.0;  // dB, on calibration views
    int iterations = 0;          // drop evaluations performed
    std::vector<int> calib_view_ids;
};

// Binary search for the largest K whose calibration-view PSNR drop (relative
// to the lossless renders, capped at 100 dB) stays within target_drop. The
// criterion is the mean drop across views, or the worst view's drop when
// worst_case is set. The LUT must already be built. target_drop <= 0 returns
// K = 0.
CalibrationResult search_k(std::span<const Gaussian3D> scene,
                           std::span<const Camera> calib_views,
                           double target_drop, const RenderConfig& cfg,
                           const TUpperLUT& lut, bool worst_case = false);

// Mean PSNR-drop of AdaGScale at `k` against the given lossless references.
double mean_psnr_drop(std::span<const Gaussian3D> scene,
                      std::span<const Camera> views,
                      std::span<const Image> references, double k,
                      const RenderConfig& cfg, const TUpperLUT& lut,
                      bool worst_case = false);

std::string calibration_to_json(const CalibrationResult& r);
CalibrationResult calibration_from_json(const std::string& text);

}  // namespace ags
