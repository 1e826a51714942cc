#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adagscale/analysis.hpp"
#include "adagscale/calibrate.hpp"
#include "adagscale/gsio.hpp"
#include "adagscale/rasterizer.hpp"
#include "adagscale/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitBadFlags = 2;
constexpr int kExitIo = 3;
constexpr int kExitMissingCalibration = 4;

struct BadFlags : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingCalibration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SceneOptions {
    std::string scene;         // "synth:<layout>" or a .ply path
    std::string cameras = "synth";  // "synth" or a cameras.json path
    std::uint64_t seed = 1;
    int count = 5000;
    int width = 640, height = 480;
    float focal = 500.0f;
    int views = 24;
};

struct LoadedScene {
    std::vector<ags::Gaussian3D> gaussians;
    std::vector<ags::Camera> cameras;
};

void add_scene_flags(CLI::App* cmd, SceneOptions& opt) {
    cmd->add_option("--scene", opt.scene,
                    "synth:<slab|two_slab|veil|ramp|aniso> or a trained .ply")
        ->required();
    cmd->add_option("--cameras", opt.cameras,
                    "'synth' or a cameras.json path");
    cmd->add_option("--seed", opt.seed, "seed for all synthetic randomness");
    cmd->add_option("--count", opt.count, "synthetic gaussian count");
    cmd->add_option("--width", opt.width, "synthetic camera width");
    cmd->add_option("--height", opt.height, "synthetic camera height");
    cmd->add_option("--focal", opt.focal, "synthetic focal length, pixels");
    cmd->add_option("--views", opt.views, "synthetic camera count");
}

void add_render_flags(CLI::App* cmd, ags::RenderConfig& cfg) {
    cmd->add_option("--threads", cfg.thread_count, "worker count, 0 = auto");
    cmd->add_option("--tile-size", cfg.tile_size, "tile edge, pixels");
    cmd->add_flag("--fixed-aabb", cfg.fixed_radius_aabb,
                  "legacy 3-sigma AABB footprint (parity runs; not lossless "
                  "for high opacities)");
}

LoadedScene load_scene(const SceneOptions& opt) {
    LoadedScene out;
    if (opt.scene.rfind("synth:", 0) == 0) {
        ags::SynthSpec spec;
        spec.layout = opt.scene.substr(6);
        spec.camera_count = opt.views;
        spec.width = opt.width;
        spec.height = opt.height;
        spec.fx = spec.fy = opt.focal;
        ags::SynthScene scene;
        try {
            scene = ags::synth_scene(opt.seed, opt.count, spec);
        } catch (const std::invalid_argument& e) {
            throw BadFlags(e.what());
        }
        out.gaussians = std::move(scene.gaussians);
        out.cameras = std::move(scene.cameras);
    } else {
        const ags::PlyLoadResult ply = ags::load_ply_file(opt.scene);
        if (ply.rejected > 0)
            std::cerr << "warning: dropped " << ply.rejected
                      << " non-finite elements from " << opt.scene << "\n";
        out.gaussians = std::move(ply.gaussians);
        out.cameras = ags::orbit_cameras(out.gaussians, opt.views, opt.width,
                                         opt.height, opt.focal, opt.focal,
                                         opt.seed);
    }
    if (opt.cameras != "synth") {
        const ags::CameraLoadResult cams = ags::load_cameras_file(opt.cameras);
        for (const std::string& e : cams.errors)
            std::cerr << "warning: cameras: " << e << "\n";
        out.cameras = cams.cameras;
    }
    if (out.cameras.empty()) throw BadFlags("no usable cameras");
    return out;
}

std::vector<double> parse_fractions(const std::string& text) {
    std::vector<double> out;
    auto parse_num = [](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw BadFlags("bad fraction '" + s + "'");
        return v;
    };
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        // lo..hi[:step]
        double step = 0.1;
        std::string hi_part = text.substr(dots + 2);
        const auto colon = hi_part.find(':');
        if (colon != std::string::npos) {
            step = parse_num(hi_part.substr(colon + 1));
            hi_part = hi_part.substr(0, colon);
        }
        const double lo = parse_num(text.substr(0, dots));
        const double hi = parse_num(hi_part);
        if (step <= 0.0 || hi < lo) throw BadFlags("bad fraction range");
        for (double f = lo; f <= hi + 1e-9; f += step) out.push_back(f);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok =
            text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!tok.empty()) out.push_back(parse_num(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw BadFlags("no fractions given");
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ags::IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ags::IoError("write failure on '" + path + "'");
}

// Resolves mode + K + LUT from --mode/--k/--calibration.
struct ModeArgs {
    std::string mode_name = "ellipse";
    double k = -1.0;  // <0 = not given
    std::string calibration_path;

    ags::Mode mode() const {
        ags::Mode m;
        if (!ags::parse_mode(mode_name, m))
            throw BadFlags("unknown mode '" + mode_name + "'");
        return m;
    }

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--mode", mode_name, "aabb|obb|ellipse|adagscale");
        cmd->add_option("--k", k, "peripheral loss budget (adagscale)");
        cmd->add_option("--calibration", calibration_path,
                        "calibration json from the calibrate command");
    }

    // Returns the LUT to use; fills cfg.k. Only meaningful in adagscale mode.
    ags::TUpperLUT resolve(ags::RenderConfig& cfg) const {
        ags::TUpperLUT lut;  // conservative all-ones fallback
        if (cfg.mode != ags::Mode::AdaGScale) return lut;
        if (calibration_path.empty() && k < 0.0)
            throw MissingCalibration(
                "adagscale mode needs --k or --calibration");
        if (!calibration_path.empty()) {
            std::ifstream in(calibration_path);
            if (!in)
                throw ags::IoError("cannot open '" + calibration_path + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            const ags::CalibrationResult cal =
                ags::calibration_from_json(buf.str());
            lut = cal.lut;
            cfg.k = static_cast<float>(cal.k);
        }
        if (k >= 0.0) cfg.k = static_cast<float>(k);
        return lut;
    }
};

int cmd_render(const SceneOptions& sopt, const ModeArgs& margs,
               ags::RenderConfig cfg, const std::string& out_dir, int view,
               const std::string& psnr_vs) {
    cfg.mode = margs.mode();
    const ags::TUpperLUT lut = margs.resolve(cfg);
    const LoadedScene scene = load_scene(sopt);

    fs::create_directories(out_dir);
    std::vector<int> selected;
    if (view >= 0) {
        if (view >= static_cast<int>(scene.cameras.size()))
            throw BadFlags("--view out of range");
        selected.push_back(view);
    } else {
        for (std::size_t i = 0; i < scene.cameras.size(); ++i)
            selected.push_back(static_cast<int>(i));
    }

    ordered_json report;
    report["mode"] = margs.mode_name;
    report["k"] = cfg.mode == ags::Mode::AdaGScale ? cfg.k : 0.0;
    report["seed"] = sopt.seed;
    report["tile_size"] = cfg.tile_size;
    std::size_t pair_total = 0, splat_total = 0;
    std::map<std::string, double> time_total;
    ordered_json views_json = ordered_json::array();
    double psnr_acc = 0.0;
    for (int v : selected) {
        const ags::RenderReport rep = ags::render(
            scene.gaussians, scene.cameras[v], cfg,
            cfg.mode == ags::Mode::AdaGScale ? &lut : nullptr);
        char name[32];
        std::snprintf(name, sizeof name, "view_%03d.ppm", v);
        ags::write_image(rep.image, (fs::path(out_dir) / name).string());
        pair_total += rep.pair_count;
        splat_total += rep.splat_count;
        for (const auto& [k2, t] : rep.stage_times) time_total[k2] += t;
        ordered_json vj;
        vj["view"] = v;
        vj["splat_count"] = rep.splat_count;
        vj["pair_count"] = rep.pair_count;
        views_json.push_back(vj);
        if (!psnr_vs.empty()) {
            const ags::Image ref =
                ags::load_ppm((fs::path(psnr_vs) / name).string());
            psnr_acc += ags::psnr_capped(rep.image, ref);
        }
    }
    report["splat_count"] = splat_total;
    report["pair_count"] = pair_total;
    report["views"] = views_json;
    if (!psnr_vs.empty())
        report["psnr_vs"] = psnr_acc / static_cast<double>(selected.size());
    report["stage_times"] = time_total;

    write_text_file((fs::path(out_dir) / "report.json").string(),
                    report.dump(2) + "\n");
    std::cout << "rendered " << selected.size() << " view(s), "
              << pair_total << " pairs -> " << out_dir << "\n";
    return 0;
}

int cmd_calibrate(const SceneOptions& sopt, double target_drop,
                  ags::RenderConfig cfg, int calib_views,
                  const std::string& out_file, bool worst_case) {
    const LoadedScene scene = load_scene(sopt);
    const int n = std::min<int>(calib_views,
                                static_cast<int>(scene.cameras.size()));
    const std::span<const ags::Camera> views(scene.cameras.data(),
                                             static_cast<std::size_t>(n));
    const ags::TUpperLUT lut = ags::build_lut(scene.gaussians, views, cfg);
    const ags::CalibrationResult res = ags::search_k(
        scene.gaussians, views, target_drop, cfg, lut, worst_case);
    write_text_file(out_file, ags::calibration_to_json(res));
    std::cout << "k " << ags::format_double(res.k) << "\nachieved_drop "
              << ags::format_double(res.achieved_drop) << "\niterations "
              << res.iterations << "\n";
    return 0;
}

int cmd_compare(const SceneOptions& sopt, const std::string& modes_csv,
                const std::string& ks_csv, const ModeArgs& margs,
                ags::RenderConfig cfg, const std::string& out_file) {
    const LoadedScene scene = load_scene(sopt);
    std::vector<ags::ReportSpec> specs;
    std::vector<std::string> modes;
    {
        std::size_t pos = 0;
        while (pos <= modes_csv.size()) {
            const auto comma = modes_csv.find(',', pos);
            modes.push_back(modes_csv.substr(
                pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    std::vector<double> ks;
    if (!ks_csv.empty()) ks = parse_fractions(ks_csv);

    ags::RenderConfig ada_cfg = cfg;
    ada_cfg.mode = ags::Mode::AdaGScale;
    ags::TUpperLUT lut;
    bool have_lut = false;

    for (const std::string& name : modes) {
        ags::Mode m;
        if (!ags::parse_mode(name, m))
            throw BadFlags("unknown mode '" + name + "'");
        if (m == ags::Mode::AdaGScale) {
            if (!have_lut && !margs.calibration_path.empty()) {
                lut = margs.resolve(ada_cfg);
                have_lut = true;
            }
            std::vector<double> row_ks = ks;
            if (row_ks.empty()) {
                if (!have_lut && margs.k < 0.0)
                    throw MissingCalibration(
                        "adagscale rows need --k-values, --k, or "
                        "--calibration");
                row_ks.push_back(margs.k >= 0.0 ? margs.k : ada_cfg.k);
            }
            for (double k : row_ks) specs.push_back({m, k});
        } else {
            specs.push_back({m, 0.0});
        }
    }

    const int n = std::min<int>(sopt.views,
                                static_cast<int>(scene.cameras.size()));
    const std::span<const ags::Camera> views(scene.cameras.data(),
                                             static_cast<std::size_t>(n));
    const auto rows = ags::pair_report(scene.gaussians, views, specs, cfg,
                                       have_lut ? &lut : nullptr);
    const std::string csv = ags::pair_report_csv(rows);
    if (out_file.empty())
        std::cout << csv;
    else
        write_text_file(out_file, csv);
    return 0;
}

int cmd_bench(const SceneOptions& sopt, const ModeArgs& margs,
              ags::RenderConfig cfg, int repeats,
              const std::string& out_file) {
    cfg.mode = margs.mode();
    const ags::TUpperLUT lut = margs.resolve(cfg);
    const LoadedScene scene = load_scene(sopt);
    repeats = std::max(repeats, 5);

    std::map<std::string, std::vector<double>> samples;
    std::vector<double> totals;
    std::size_t pair_count = 0;
    for (int r = 0; r < repeats; ++r) {
        std::map<std::string, double> sums;
        for (const ags::Camera& cam : scene.cameras) {
            const ags::RenderReport rep = ags::render(
                scene.gaussians, cam, cfg,
                cfg.mode == ags::Mode::AdaGScale ? &lut : nullptr);
            for (const auto& [k2, t] : rep.stage_times) sums[k2] += t;
            if (r == 0) pair_count += rep.pair_count;
        }
        double total = 0.0;
        for (const auto& [k2, t] : sums) {
            samples[k2].push_back(t);
            total += t;
        }
        totals.push_back(total);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };

    std::string csv =
        "mode,k,repeats,pair_count,preprocess_s,pair_gen_s,sort_s,raster_s,"
        "total_s\n";
    csv += margs.mode_name;
    csv += ',';
    csv += ags::format_double(cfg.mode == ags::Mode::AdaGScale ? cfg.k : 0.0);
    csv += ',';
    csv += std::to_string(repeats);
    csv += ',';
    csv += std::to_string(pair_count);
    for (const char* stage : {"preprocess", "pair_gen", "sort", "raster"}) {
        csv += ',';
        csv += ags::format_double(median(samples[stage]));
    }
    csv += ',';
    csv += ags::format_double(median(totals));
    csv += '\n';
    if (out_file.empty())
        std::cout << csv;
    else
        write_text_file(out_file, csv);
    return 0;
}

int cmd_analyze(const SceneOptions& sopt, const std::string& orderings_csv,
                const std::string& fractions_expr, const ModeArgs& margs,
                ags::RenderConfig cfg, const std::string& out_file,
                const std::string& profile_file) {
    const LoadedScene scene = load_scene(sopt);
    std::vector<ags::SkipOrdering> orderings;
    {
        std::size_t pos = 0;
        while (pos <= orderings_csv.size()) {
            const auto comma = orderings_csv.find(',', pos);
            const std::string tok = orderings_csv.substr(
                pos, comma == std::string::npos ? comma : comma - pos);
            ags::SkipOrdering o;
            if (!ags::parse_ordering(tok, o))
                throw BadFlags("unknown ordering '" + tok + "'");
            orderings.push_back(o);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    const std::vector<double> fractions = parse_fractions(fractions_expr);

    ags::RenderConfig ada_cfg = cfg;
    ada_cfg.mode = ags::Mode::AdaGScale;
    ada_cfg.k = 0.0f;
    ags::TUpperLUT lut;
    const ags::TUpperLUT* lut_ptr = nullptr;
    if (!margs.calibration_path.empty()) {
        lut = margs.resolve(ada_cfg);
        lut_ptr = &lut;
    }

    const int n = std::min<int>(sopt.views,
                                static_cast<int>(scene.cameras.size()));
    const std::span<const ags::Camera> views(scene.cameras.data(),
                                             static_cast<std::size_t>(n));
    const auto rows = ags::skip_experiment(scene.gaussians, views, fractions,
                                           orderings, cfg, lut_ptr);
    const std::string csv = ags::skip_rows_csv(rows);
    if (out_file.empty())
        std::cout << csv;
    else
        write_text_file(out_file, csv);

    if (!profile_file.empty()) {
        const auto bins = ags::contribution_profile(scene.gaussians, views, cfg);
        write_text_file(profile_file, ags::profile_csv(bins));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tile-based 3D Gaussian Splatting renderer with "
                 "viewpoint-adaptive pair reduction"};
    app.require_subcommand(1);

    SceneOptions sopt;
    ModeArgs margs;
    ags::RenderConfig cfg;
    std::string out_dir = ".";
    std::string out_file;
    std::string calib_out = "calibration.json";
    std::string psnr_vs;
    std::string profile_file;
    std::string modes_csv = "aabb,obb,ellipse";
    std::string ks_csv;
    std::string orderings_csv = "exact,maxt,tupper";
    std::string fractions_expr = "0.1..0.9";
    double target_drop = 0.5;
    int calib_views = 16;
    int view = -1;
    int repeats = 5;

    CLI::App* render = app.add_subcommand("render", "render views to images");
    add_scene_flags(render, sopt);
    add_render_flags(render, cfg);
    margs.add_flags(render);
    render->add_option("--out", out_dir, "output directory");
    render->add_option("--view", view, "render a single view index");
    render->add_option("--psnr-vs", psnr_vs,
                       "directory of reference images to compare against");

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "fit K and the T-upper LUT");
    add_scene_flags(calibrate, sopt);
    add_render_flags(calibrate, cfg);
    calibrate->add_option("--target-drop", target_drop, "dB budget")
        ->required();
    calibrate->add_option("--calib-views", calib_views,
                          "calibration viewpoint count");
    calibrate->add_option("--out", calib_out, "calibration json path");
    bool worst_case = false;
    calibrate->add_flag("--worst-case", worst_case,
                        "budget the worst calibration view instead of the mean");

    CLI::App* compare =
        app.add_subcommand("compare", "pair counts and quality across modes");
    add_scene_flags(compare, sopt);
    add_render_flags(compare, cfg);
    margs.add_flags(compare);
    compare->add_option("--modes", modes_csv, "comma list of modes");
    compare->add_option("--k-values", ks_csv, "comma list of K values");
    compare->add_option("--out", out_file, "csv path (stdout if omitted)");

    CLI::App* bench = app.add_subcommand("bench", "median stage times");
    add_scene_flags(bench, sopt);
    add_render_flags(bench, cfg);
    margs.add_flags(bench);
    bench->add_option("--repeats", repeats, "render repetitions (>= 5)");
    bench->add_option("--out", out_file, "csv path (stdout if omitted)");

    CLI::App* analyze =
        app.add_subcommand("analyze", "contribution skip experiments");
    add_scene_flags(analyze, sopt);
    add_render_flags(analyze, cfg);
    margs.add_flags(analyze);
    analyze->add_option("--orderings", orderings_csv,
                        "comma list of exact|maxt|tupper");
    analyze->add_option("--fractions", fractions_expr,
                        "comma list or lo..hi[:step]");
    analyze->add_option("--out", out_file, "csv path (stdout if omitted)");
    analyze->add_option("--profile", profile_file,
                        "also write a contribution-distance profile csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitBadFlags;
    }

    try {
        if (render->parsed())
            return cmd_render(sopt, margs, cfg, out_dir, view, psnr_vs);
        if (calibrate->parsed())
            return cmd_calibrate(sopt, target_drop, cfg, calib_views,
                                 calib_out, worst_case);
        if (compare->parsed())
            return cmd_compare(sopt, modes_csv, ks_csv, margs, cfg, out_file);
        if (bench->parsed())
            return cmd_bench(sopt, margs, cfg, repeats, out_file);
        if (analyze->parsed())
            return cmd_analyze(sopt, orderings_csv, fractions_expr, margs, cfg,
                               out_file, profile_file);
    } catch (const BadFlags& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadFlags;
    } catch (const std::invalid_argument& e) {
        // nonsensical flag values surface as contract violations
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadFlags;
    } catch (const MissingCalibration& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingCalibration;
    } catch (const ags::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
