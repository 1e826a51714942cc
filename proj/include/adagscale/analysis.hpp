#pragma once

#include <span>
#include <string>
#include <vector>

#include "adagscale/image.hpp"
#include "adagscale/lut.hpp"
#include "adagscale/rasterizer.hpp"
#include "adagscale/scene.hpp"

namespace ags {

// Sentinel used wherever an "infinite" PSNR has to live in a table.
inline constexpr double kPsnrCap = 100.0;

// 10*log10(1/MSE) over the float buffers, all pixels and channels. Identical
// images return +infinity. Throws std::invalid_argument on size mismatch.
double psnr(const Image& a, const Image& b);

// min(psnr, kPsnrCap); what reports and calibration use.
double psnr_capped(const Image& a, const Image& b);

enum class SkipOrdering { Exact, MaxT, TUpper };

const char* ordering_name(SkipOrdering o);
bool parse_ordering(const std::string& name, SkipOrdering& out);

struct SkipRow {
    SkipOrdering ordering;
    double fraction;
    double psnr_db;  // capped, mean over views, vs the unskipped render
};

// Two-pass contribution-skipping experiment. Pass 1 renders each view with
// blend recording and takes the per-view quantile of the ordering metric at
// each fraction; pass 2 re-renders, dropping every blend whose metric falls
// below the quantile (no color, no transmittance decay). For the TUpper
// ordering a LUT is required; when `lut` is null one is built from `views`.
std::vector<SkipRow> skip_experiment(std::span<const Gaussian3D> scene,
                                     std::span<const Camera> views,
                                     std::span<const double> fractions,
                                     std::span<const SkipOrdering> orderings,
                                     const RenderConfig& cfg,
                                     const TUpperLUT* lut = nullptr);

struct ProfileBin {
    double normalized_distance;  // bin center as a fraction of r_max
    double mean_contribution;    // mean alpha*T of blends in the bin
    std::size_t count;
};

// Mean recorded contribution binned by Mahalanobis distance (20 bins over
// [0, sqrt(2 ln(1/tau))]), pooled over all views. Empty scene -> empty table.
std::vector<ProfileBin> contribution_profile(std::span<const Gaussian3D> scene,
                                             std::span<const Camera> views,
                                             const RenderConfig& cfg);

struct ReportSpec {
    Mode mode;
    double k = 0.0;  // used only in AdaGScale mode
};

struct PairReportRow {
    std::string mode;
    double k;
    std::size_t pair_count;      // summed over views
    double reduction_pct;        // vs ELLIPSE, mean of per-view ratios
    double psnr_drop_db;         // vs ELLIPSE renders, mean over views
    double t_preprocess, t_pair_gen, t_sort, t_raster;  // summed seconds
};

std::vector<PairReportRow> pair_report(std::span<const Gaussian3D> scene,
                                       std::span<const Camera> views,
                                       std::span<const ReportSpec> specs,
                                       const RenderConfig& cfg,
                                       const TUpperLUT* lut = nullptr);

// CSV serialization; header row, comma delimiter, '.' decimal separator.
std::string skip_rows_csv(std::span<const SkipRow> rows);
std::string profile_csv(std::span<const ProfileBin> bins);
std::string pair_report_csv(std::span<const PairReportRow> rows);

// Locale-independent shortest-round-trip float formatting for all CSV/JSON.
std::string format_double(double v);

}  // namespace ags
