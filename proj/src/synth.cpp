#include "adagscale/synth.hpp"

#include <cmath>
#include <stdexcept>

namespace ags {

namespace {

constexpr float kShC0 = 0.28209479177387814f;

// Degree-0 coefficients that evaluate back to the requested rgb.
std::vector<float> dc_for_rgb(Vec3f rgb) {
    return {(rgb.x - 0.5f) / kShC0, (rgb.y - 0.5f) / kShC0,
            (rgb.z - 0.5f) / kShC0};
}

Quatf random_rotation(Rng& rng) {
    Quatf q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    if (q.norm() < 1e-6f) q = Quatf{1, 0, 0, 0};
    return q.normalized();
}

Camera look_at(Vec3f pos, Vec3f target, float fx, float fy, int w, int h) {
    Vec3f forward = (target - pos).normalized();
    Vec3f world_up{0, 1, 0};
    if (std::abs(forward.dot(world_up)) > 0.99f) world_up = {0, 0, 1};
    const Vec3f right = world_up.cross(forward).normalized();
    const Vec3f down = forward.cross(right);
    Camera cam;
    cam.position = pos;
    cam.rotation(0, 0) = right.x;
    cam.rotation(0, 1) = right.y;
    cam.rotation(0, 2) = right.z;
    cam.rotation(1, 0) = down.x;
    cam.rotation(1, 1) = down.y;
    cam.rotation(1, 2) = down.z;
    cam.rotation(2, 0) = forward.x;
    cam.rotation(2, 1) = forward.y;
    cam.rotation(2, 2) = forward.z;
    cam.fx = fx;
    cam.fy = fy;
    cam.width = w;
    cam.height = h;
    return cam;
}

std::vector<Camera> arc_cameras(Rng& rng, const SynthSpec& spec, float radius,
                                float angle_span) {
    std::vector<Camera> cams;
    cams.reserve(spec.camera_count);
    for (int i = 0; i < spec.camera_count; ++i) {
        const float t = spec.camera_count > 1
                            ? static_cast<float>(i) / (spec.camera_count - 1)
                            : 0.5f;
        const float theta = (t - 0.5f) * angle_span;
        const float y = rng.uniform(-1.5f, 1.5f);
        const Vec3f pos{radius * std::sin(theta), y, -radius * std::cos(theta)};
        cams.push_back(
            look_at(pos, {0, 0, 0}, spec.fx, spec.fy, spec.width, spec.height));
    }
    return cams;
}

Gaussian3D slab_gaussian(Rng& rng, Vec2f half_extent, float z_center,
                         float z_thickness, Vec2f scale_range,
                         Vec2f opacity_range) {
    Gaussian3D g;
    g.mean = {rng.uniform(-half_extent.x, half_extent.x),
              rng.uniform(-half_extent.y, half_extent.y),
              z_center + rng.uniform(-z_thickness, z_thickness)};
    g.scale = {rng.uniform(scale_range.x, scale_range.y),
               rng.uniform(scale_range.x, scale_range.y),
               rng.uniform(0.05f, 0.15f)};
    g.rotation = random_rotation(rng);
    g.opacity = rng.uniform(opacity_range.x, opacity_range.y);
    g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                       rng.uniform(0.1f, 0.9f)});
    return g;
}

SynthScene make_slab(Rng& rng, int count, const SynthSpec& spec) {
    SynthScene scene;
    scene.gaussians.reserve(count);
    const int front = (count * 3 + 2) / 5;
    for (int i = 0; i < front; ++i)
        scene.gaussians.push_back(slab_gaussian(rng, {8, 6}, 0.0f, 0.3f,
                                                {0.15f, 0.45f}, {0.7f, 0.97f}));
    for (int i = front; i < count; ++i)
        scene.gaussians.push_back(slab_gaussian(rng, {14, 10}, 15.0f, 0.3f,
                                                {0.3f, 0.8f}, {0.4f, 0.9f}));
    scene.cameras = arc_cameras(rng, spec, 24.0f, 1.2f);
    return scene;
}

Quatf small_rotation(Rng& rng, float max_angle) {
    const float angle = rng.uniform(0.0f, max_angle);
    Vec3f axis{rng.normal(), rng.normal(), rng.normal()};
    axis = axis.norm() > 1e-6f ? axis.normalized() : Vec3f{0, 0, 1};
    const float s = std::sin(0.5f * angle);
    return Quatf{std::cos(0.5f * angle), axis.x * s, axis.y * s, axis.z * s}
        .normalized();
}

SynthScene make_two_slab(Rng& rng, int count, const SynthSpec& spec) {
    SynthScene scene;
    scene.gaussians.reserve(count);
    const int front = count / 2;
    const int rear = count - front;
    // Splat size tracks density so the front slab stays a closed occluder at
    // any count; the rear slab is narrow enough that every arc camera sees it
    // only through the front one.
    const float front_spacing =
        std::sqrt(20.0f * 14.0f / static_cast<float>(std::max(front, 1)));
    const float rear_spacing =
        std::sqrt(12.0f * 8.0f / static_cast<float>(std::max(rear, 1)));
    for (int i = 0; i < front; ++i) {
        Gaussian3D g;
        g.mean = {rng.uniform(-10, 10), rng.uniform(-7, 7),
                  rng.uniform(-0.2f, 0.2f)};
        const float s = front_spacing * rng.uniform(1.1f, 1.8f);
        g.scale = {s, s * rng.uniform(0.8f, 1.2f), 0.1f * s};
        g.rotation = small_rotation(rng, 0.2f);
        g.opacity = rng.uniform(0.85f, 0.98f);
        g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                           rng.uniform(0.1f, 0.9f)});
        scene.gaussians.push_back(std::move(g));
    }
    for (int i = 0; i < rear; ++i) {
        Gaussian3D g;
        g.mean = {rng.uniform(-6, 6), rng.uniform(-4, 4),
                  20.0f + rng.uniform(-0.2f, 0.2f)};
        const float s = rear_spacing * rng.uniform(0.9f, 1.5f);
        g.scale = {s, s * rng.uniform(0.8f, 1.2f), 0.1f * s};
        g.rotation = small_rotation(rng, 0.2f);
        g.opacity = rng.uniform(0.5f, 0.95f);
        g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                           rng.uniform(0.1f, 0.9f)});
        scene.gaussians.push_back(std::move(g));
    }
    scene.cameras = arc_cameras(rng, spec, 22.0f, 1.1f);
    return scene;
}

SynthScene make_veil(Rng& rng, int count, const SynthSpec& spec) {
    SynthScene scene;
    scene.gaussians.reserve(count);
    // A closed opaque curtain in front of a rear wall that carries most of
    // the Gaussians, overlapping heavily so the occluded side dominates the
    // pair count.
    const int front = (count * 35 + 50) / 100;
    const int rear = count - front;
    const float front_spacing =
        std::sqrt(20.0f * 14.0f / static_cast<float>(std::max(front, 1)));
    const float rear_spacing =
        std::sqrt(12.0f * 8.0f / static_cast<float>(std::max(rear, 1)));
    for (int i = 0; i < front; ++i) {
        Gaussian3D g;
        g.mean = {rng.uniform(-10, 10), rng.uniform(-7, 7),
                  rng.uniform(-0.2f, 0.2f)};
        const float s = front_spacing * rng.uniform(1.1f, 1.8f);
        g.scale = {s, s * rng.uniform(0.8f, 1.2f), 0.1f * s};
        g.rotation = small_rotation(rng, 0.2f);
        g.opacity = rng.uniform(0.85f, 0.98f);
        g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                           rng.uniform(0.1f, 0.9f)});
        scene.gaussians.push_back(std::move(g));
    }
    for (int i = 0; i < rear; ++i) {
        Gaussian3D g;
        g.mean = {rng.uniform(-6, 6), rng.uniform(-4, 4),
                  20.0f + rng.uniform(-0.2f, 0.2f)};
        const float s = rear_spacing * rng.uniform(8.0f, 14.0f);
        g.scale = {s, s * rng.uniform(0.8f, 1.2f), 0.1f * s};
        g.rotation = small_rotation(rng, 0.2f);
        g.opacity = rng.uniform(0.6f, 0.95f);
        g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                           rng.uniform(0.1f, 0.9f)});
        scene.gaussians.push_back(std::move(g));
    }
    scene.cameras = arc_cameras(rng, spec, 22.0f, 1.1f);
    return scene;
}

SynthScene make_ramp(Rng& rng, int count, const SynthSpec& spec) {
    SynthScene scene;
    scene.gaussians.reserve(count);
    const float half_w = 0.5f * spec.width / spec.fx;   // tan of half fov
    const float half_h = 0.5f * spec.height / spec.fy;
    for (int i = 0; i < count; ++i) {
        Gaussian3D g;
        const float z = rng.uniform(3.0f, 92.0f);
        g.mean = {rng.uniform(-0.8f, 0.8f) * half_w * z,
                  rng.uniform(-0.8f, 0.8f) * half_h * z, z};
        const float s = z * rng.uniform(0.010f, 0.022f);
        g.scale = {s * rng.uniform(0.6f, 1.4f), s * rng.uniform(0.6f, 1.4f),
                   s * rng.uniform(0.6f, 1.4f)};
        g.rotation = random_rotation(rng);
        g.opacity = rng.uniform(0.3f, 0.95f);
        g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                           rng.uniform(0.1f, 0.9f)});
        scene.gaussians.push_back(std::move(g));
    }
    // Cameras stay in a tight cluster so every Gaussian keeps a depth inside
    // [near_plane, 100] from all of them.
    scene.cameras.reserve(spec.camera_count);
    for (int i = 0; i < spec.camera_count; ++i) {
        Camera cam;
        cam.position = {rng.uniform(-0.4f, 0.4f), rng.uniform(-0.3f, 0.3f),
                        rng.uniform(-0.8f, 0.0f)};
        cam.fx = spec.fx;
        cam.fy = spec.fy;
        cam.width = spec.width;
        cam.height = spec.height;
        scene.cameras.push_back(cam);
    }
    return scene;
}

SynthScene make_aniso(Rng& rng, int count, const SynthSpec& spec) {
    SynthScene scene;
    scene.gaussians.reserve(count);
    for (int i = 0; i < count; ++i) {
        Gaussian3D g;
        g.mean = {rng.uniform(-10.0f, 10.0f), rng.uniform(-7.0f, 7.0f),
                  rng.uniform(-4.0f, 4.0f)};
        const float major = rng.uniform(0.5f, 1.2f);
        g.scale = {major, major * rng.uniform(0.08f, 0.25f),
                   rng.uniform(0.05f, 0.15f)};
        g.rotation = random_rotation(rng);
        g.opacity = rng.uniform(0.35f, 0.95f);
        g.sh = dc_for_rgb({rng.uniform(0.1f, 0.9f), rng.uniform(0.1f, 0.9f),
                           rng.uniform(0.1f, 0.9f)});
        scene.gaussians.push_back(std::move(g));
    }
    scene.cameras = arc_cameras(rng, spec, 26.0f, 1.2f);
    return scene;
}

}  // namespace

SynthScene synth_scene(std::uint64_t seed, int count, const SynthSpec& spec) {
    if (count < 1) throw std::invalid_argument("synth_scene: count must be >= 1");
    Rng rng(seed);
    if (spec.layout == "slab") return make_slab(rng, count, spec);
    if (spec.layout == "two_slab") return make_two_slab(rng, count, spec);
    if (spec.layout == "veil") return make_veil(rng, count, spec);
    if (spec.layout == "ramp") return make_ramp(rng, count, spec);
    if (spec.layout == "aniso") return make_aniso(rng, count, spec);
    throw std::invalid_argument("synth_scene: unknown layout '" + spec.layout +
                                "'");
}

std::vector<Camera> orbit_cameras(const std::vector<Gaussian3D>& gaussians,
                                  int count, int width, int height, float fx,
                                  float fy, std::uint64_t seed) {
    Vec3f lo{0, 0, 0}, hi{0, 0, 0};
    if (!gaussians.empty()) {
        lo = hi = gaussians.front().mean;
    }
    for (const auto& g : gaussians) {
        lo = {std::min(lo.x, g.mean.x), std::min(lo.y, g.mean.y),
              std::min(lo.z, g.mean.z)};
        hi = {std::max(hi.x, g.mean.x), std::max(hi.y, g.mean.y),
              std::max(hi.z, g.mean.z)};
    }
    const Vec3f center = (lo + hi) * 0.5f;
    const float radius = std::max(1.0f, (hi - lo).norm());
    Rng rng(seed);
    std::vector<Camera> cams;
    cams.reserve(count);
    for (int i = 0; i < count; ++i) {
        const float theta =
            count > 1 ? (static_cast<float>(i) / count) * 6.2831853f : 0.0f;
        const Vec3f pos = center + Vec3f{radius * 2.0f * std::sin(theta),
                                         rng.uniform(-0.1f, 0.1f) * radius,
                                         -radius * 2.0f * std::cos(theta)};
        cams.push_back(look_at(pos, center, fx, fy, width, height));
    }
    return cams;
}

}  // namespace ags
