#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <stdexcept>

#include "adagscale/analysis.hpp"
#include "adagscale/calibrate.hpp"
#include "adagscale/gsio.hpp"
#include "adagscale/rasterizer.hpp"
#include "adagscale/synth.hpp"

namespace py = pybind11;

namespace {

struct Scene {
    std::vector<ags::Gaussian3D> gaussians;
    std::vector<ags::Camera> cameras;
};

Scene make_synth(std::uint64_t seed, int count, const std::string& layout,
                 int cameras, int width, int height, float focal) {
    ags::SynthSpec spec;
    spec.layout = layout;
    spec.camera_count = cameras;
    spec.width = width;
    spec.height = height;
    spec.fx = spec.fy = focal;
    ags::SynthScene s = ags::synth_scene(seed, count, spec);
    return {std::move(s.gaussians), std::move(s.cameras)};
}

Scene load_ply_scene(const std::string& path, int orbit_views, int width,
                     int height, float focal, std::uint64_t seed) {
    Scene out;
    out.gaussians = ags::load_ply_file(path).gaussians;
    out.cameras = ags::orbit_cameras(out.gaussians, orbit_views, width, height,
                                     focal, focal, seed);
    return out;
}

ags::TUpperLUT lut_from_bins(const std::vector<float>& bins, float depth_min,
                             float depth_max) {
    ags::TUpperLUT lut;
    if (!bins.empty()) {
        lut.bins = bins;
        lut.depth_min = depth_min;
        lut.depth_max = depth_max;
    }
    return lut;
}

py::array_t<float> image_to_numpy(const ags::Image& img) {
    py::array_t<float> out({img.height, img.width, 3});
    std::memcpy(out.mutable_data(), img.data.data(),
                img.data.size() * sizeof(float));
    return out;
}

ags::Image numpy_to_image(const py::array_t<float, py::array::c_style |
                                                        py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3)
        throw std::invalid_argument("expected an (H, W, 3) float array");
    ags::Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.data.data(), a.data(), img.data.size() * sizeof(float));
    return img;
}

ags::RenderConfig config_for(const std::string& mode, double k, int threads,
                             int tile_size) {
    ags::RenderConfig cfg;
    if (!ags::parse_mode(mode, cfg.mode))
        throw std::invalid_argument("unknown mode '" + mode + "'");
    cfg.k = static_cast<float>(k);
    cfg.thread_count = threads;
    cfg.tile_size = tile_size;
    return cfg;
}

py::dict render_view(const Scene& scene, int view, const std::string& mode,
                     double k, const std::vector<float>& lut_bins,
                     float lut_depth_min, float lut_depth_max, int threads,
                     int tile_size) {
    if (view < 0 || view >= static_cast<int>(scene.cameras.size()))
        throw std::out_of_range("view index out of range");
    const ags::RenderConfig cfg = config_for(mode, k, threads, tile_size);
    const ags::TUpperLUT lut =
        lut_from_bins(lut_bins, lut_depth_min, lut_depth_max);
    const ags::RenderReport rep =
        ags::render(scene.gaussians, scene.cameras[view], cfg,
                    cfg.mode == ags::Mode::AdaGScale ? &lut : nullptr);
    py::dict out;
    out["image"] = image_to_numpy(rep.image);
    out["pair_count"] = rep.pair_count;
    out["splat_count"] = rep.splat_count;
    py::dict times;
    for (const auto& [name, t] : rep.stage_times) times[name.c_str()] = t;
    out["stage_times"] = times;
    return out;
}

py::dict calibrate_scene(const Scene& scene, double target_drop,
                         int calib_views, int threads) {
    const int n =
        std::min<int>(calib_views, static_cast<int>(scene.cameras.size()));
    if (n < 1) throw std::invalid_argument("scene has no cameras");
    ags::RenderConfig cfg;
    cfg.thread_count = threads;
    const std::span<const ags::Camera> views(scene.cameras.data(),
                                             static_cast<std::size_t>(n));
    const ags::TUpperLUT lut = ags::build_lut(scene.gaussians, views, cfg);
    const ags::CalibrationResult res =
        ags::search_k(scene.gaussians, views, target_drop, cfg, lut);
    py::dict out;
    out["k"] = res.k;
    out["target_drop"] = res.target_drop;
    out["achieved_drop"] = res.achieved_drop;
    out["iterations"] = res.iterations;
    out["lut_bins"] = res.lut.bins;
    out["lut_depth_min"] = res.lut.depth_min;
    out["lut_depth_max"] = res.lut.depth_max;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "CPU tile-based gaussian splatting renderer with "
              "viewpoint-adaptive pair reduction";

    py::class_<Scene>(m, "Scene")
        .def_property_readonly(
            "gaussian_count",
            [](const Scene& s) { return s.gaussians.size(); })
        .def_property_readonly(
            "camera_count", [](const Scene& s) { return s.cameras.size(); })
        .def("__repr__", [](const Scene& s) {
            return "<adagscale.Scene " + std::to_string(s.gaussians.size()) +
                   " gaussians, " + std::to_string(s.cameras.size()) +
                   " cameras>";
        });

    m.def("synth_scene", &make_synth, py::arg("seed"), py::arg("count"),
          py::arg("layout") = "slab", py::arg("cameras") = 24,
          py::arg("width") = 640, py::arg("height") = 480,
          py::arg("focal") = 500.0f,
          "Deterministic synthetic scene with its camera set");

    m.def("load_ply", &load_ply_scene, py::arg("path"),
          py::arg("orbit_views") = 24, py::arg("width") = 640,
          py::arg("height") = 480, py::arg("focal") = 500.0f,
          py::arg("seed") = 1,
          "Trained splat model plus a generated camera orbit");

    m.def("render", &render_view, py::arg("scene"), py::arg("view") = 0,
          py::arg("mode") = "ellipse", py::arg("k") = 0.0,
          py::arg("lut_bins") = std::vector<float>{},
          py::arg("lut_depth_min") = 0.0f, py::arg("lut_depth_max") = 100.0f,
          py::arg("threads") = 0, py::arg("tile_size") = 16,
          "Render one view; returns dict with image, pair_count, "
          "splat_count, stage_times");

    m.def("calibrate", &calibrate_scene, py::arg("scene"),
          py::arg("target_drop"), py::arg("calib_views") = 16,
          py::arg("threads") = 0,
          "Fit the T-upper LUT and binary-search K for a PSNR-drop budget");

    m.def(
        "psnr",
        [](const py::array_t<float, py::array::c_style |
                                        py::array::forcecast>& a,
           const py::array_t<float, py::array::c_style |
                                        py::array::forcecast>& b) {
            return ags::psnr(numpy_to_image(a), numpy_to_image(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "write_image",
        [](const py::array_t<float, py::array::c_style |
                                        py::array::forcecast>& a,
           const std::string& path) {
            ags::write_image(numpy_to_image(a), path);
        },
        py::arg("image"), py::arg("path"), "8-bit binary PPM");

    m.def(
        "peripheral_score_closed",
        [](float cov_xx, float cov_xy, float cov_yy, float x, float t_const,
           float tau) {
            return ags::peripheral_score_closed({cov_xx, cov_xy, cov_yy}, x,
                                                t_const, tau);
        },
        py::arg("cov_xx"), py::arg("cov_xy"), py::arg("cov_yy"), py::arg("x"),
        py::arg("t_const") = 1.0f, py::arg("tau") = 1.0f / 255.0f);

    m.def("pack_pair_key", &ags::pack_pair_key, py::arg("tile"),
          py::arg("depth"));
}
