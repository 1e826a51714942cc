#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adagscale/scene.hpp"

namespace ags {

// Layouts:
//   slab     - textured foreground slab occluding a background wall
//   two_slab - two parallel textured slabs, opaque front; calibration scene
//   veil     - opaque curtain with a dense occluded wall carrying most of
//              the Gaussians
//   ramp     - Gaussians spread across the full depth range of the frustum
//   aniso    - strongly elongated Gaussians at random orientations
struct SynthSpec {
    std::string layout = "slab";
    int camera_count = 24;
    int width = 640;
    int height = 480;
    float fx = 500.0f;
    float fy = 500.0f;
};

struct SynthScene {
    std::vector<Gaussian3D> gaussians;
    std::vector<Camera> cameras;
};

// Deterministic for a fixed (seed, count, spec). Throws std::invalid_argument
// on an unknown layout name or count < 1.
SynthScene synth_scene(std::uint64_t seed, int count, const SynthSpec& spec);

// Orbit cameras around an arbitrary scene (used when a trained model is
// loaded without a camera set).
std::vector<Camera> orbit_cameras(const std::vector<Gaussian3D>& gaussians,
                                  int count, int width, int height, float fx,
                                  float fy, std::uint64_t seed);

}  // namespace ags
