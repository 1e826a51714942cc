#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "adagscale/image.hpp"
#include "adagscale/scene.hpp"

namespace ags {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlyLoadResult {
    std::vector<Gaussian3D> gaussians;
    std::size_t rejected = 0;  // elements dropped for non-finite values
};

// Binary little-endian PLY in the trained-splat layout: x y z nx ny nz
// f_dc_0..2 f_rest_* opacity scale_0..2 rot_0..3, all float32. Opacity is
// stored as a logit, scales as natural logs, the quaternion unnormalized.
// Throws IoError on a malformed header, missing property, or unsupported
// f_rest count.
PlyLoadResult load_ply(std::istream& in);
PlyLoadResult load_ply_file(const std::string& path);

// Inverse of load_ply. All Gaussians must share one SH degree.
void save_ply(const std::vector<Gaussian3D>& gaussians, std::ostream& out);
void save_ply_file(const std::vector<Gaussian3D>& gaussians,
                   const std::string& path);

struct CameraLoadResult {
    std::vector<Camera> cameras;
    std::size_t rejected = 0;
    std::vector<std::string> errors;  // one message per rejected entry
};

// JSON array of {id, img_name, width, height, position[3], rotation[3][3],
// fx, fy}. Rotations with orthonormality drift in (1e-5, 1e-2) are snapped
// to the nearest orthonormal matrix; entries at or past 1e-2 are rejected.
// Throws IoError when the document itself is malformed.
CameraLoadResult load_cameras(const std::string& json_text);
CameraLoadResult load_cameras_file(const std::string& path);

// Binary PPM (P6), 8 bits per channel, round-half-up quantization of
// clamped components.
void write_image(const Image& img, const std::string& path);
Image load_ppm(const std::string& path);

}  // namespace ags
