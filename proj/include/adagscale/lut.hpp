#pragma once

#include <vector>

namespace ags {

// Piecewise-constant upper bound of the per-Gaussian maximum transmittance as
// a function of camera-space depth. Bin b covers [b*w, (b+1)*w) with
// w = (depth_max - depth_min) / bins; depths past the range clamp to the
// last bin. Unobserved bins stay at the conservative 1.0.
struct TUpperLUT {
    float depth_min = 0.0f;
    float depth_max = 100.0f;
    std::vector<float> bins = std::vector<float>(20, 1.0f);

    int bin_index(float depth) const {
        const float w = (depth_max - depth_min) / static_cast<float>(bins.size());
        const int b = static_cast<int>((depth - depth_min) / w);
        if (b < 0) return 0;
        if (b >= static_cast<int>(bins.size()))
            return static_cast<int>(bins.size()) - 1;
        return b;
    }

    float value_at(float depth) const { return bins[bin_index(depth)]; }
};

}  // namespace ags
