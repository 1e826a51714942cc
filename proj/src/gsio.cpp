#include "adagscale/gsio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace ags {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Supported f_rest counts per SH degree 0..3.
int degree_for_rest_count(int rest) {
    for (int d = 1; d <= 4; ++d)
        if (rest == 3 * (d * d - 1)) return d - 1;
    return -1;
}

struct PlyHeader {
    std::size_t vertex_count = 0;
    std::vector<std::string> properties;  // in file order
    std::size_t data_offset = 0;
};

PlyHeader parse_ply_header(std::istream& in) {
    PlyHeader h;
    std::string line;
    if (!std::getline(in, line) || line != "ply")
        throw IoError("ply: missing magic line");
    if (!std::getline(in, line) || line != "format binary_little_endian 1.0")
        throw IoError("ply: expected 'format binary_little_endian 1.0'");
    bool in_vertex = false;
    bool seen_vertex = false;
    while (std::getline(in, line)) {
        if (line == "end_header") {
            if (!seen_vertex) throw IoError("ply: no vertex element");
            return h;
        }
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment") continue;
        if (tok == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            if (name == "vertex") {
                h.vertex_count = count;
                in_vertex = true;
                seen_vertex = true;
            } else {
                in_vertex = false;
            }
            continue;
        }
        if (tok == "property") {
            if (!in_vertex) continue;
            std::string type, name;
            ls >> type >> name;
            if (type != "float")
                throw IoError("ply: vertex property '" + name +
                              "' has unsupported type '" + type + "'");
            h.properties.push_back(name);
            continue;
        }
        throw IoError("ply: unexpected header line '" + line + "'");
    }
    throw IoError("ply: header not terminated");
}

}  // namespace

PlyLoadResult load_ply(std::istream& in) {
    const PlyHeader header = parse_ply_header(in);

    std::map<std::string, int> col;
    for (std::size_t i = 0; i < header.properties.size(); ++i)
        col[header.properties[i]] = static_cast<int>(i);
    auto require = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw IoError("ply: missing property '" + name + "'");
        return it->second;
    };

    const int cx = require("x"), cy = require("y"), cz = require("z");
    const int cop = require("opacity");
    const int cs0 = require("scale_0"), cs1 = require("scale_1"),
              cs2 = require("scale_2");
    const int cr0 = require("rot_0"), cr1 = require("rot_1"),
              cr2 = require("rot_2"), cr3 = require("rot_3");
    const int cdc0 = require("f_dc_0"), cdc1 = require("f_dc_1"),
              cdc2 = require("f_dc_2");

    int rest_count = 0;
    while (col.count("f_rest_" + std::to_string(rest_count))) ++rest_count;
    const int degree = degree_for_rest_count(rest_count);
    if (degree < 0)
        throw IoError("ply: unsupported f_rest count " +
                      std::to_string(rest_count));
    std::vector<int> crest(rest_count);
    for (int i = 0; i < rest_count; ++i)
        crest[i] = col["f_rest_" + std::to_string(i)];

    const std::size_t stride = header.properties.size();
    std::vector<float> row(stride);
    const int coeffs = (degree + 1) * (degree + 1);
    const int per_channel = coeffs - 1;

    PlyLoadResult out;
    out.gaussians.reserve(header.vertex_count);
    for (std::size_t e = 0; e < header.vertex_count; ++e) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(stride * sizeof(float)));
        if (!in) throw IoError("ply: truncated element data");
        bool finite = true;
        for (float v : row)
            if (!std::isfinite(v)) {
                finite = false;
                break;
            }
        if (!finite) {
            ++out.rejected;
            continue;
        }
        Gaussian3D g;
        g.mean = {row[cx], row[cy], row[cz]};
        g.opacity = static_cast<float>(sigmoid(row[cop]));
        g.scale = {static_cast<float>(std::exp(static_cast<double>(row[cs0]))),
                   static_cast<float>(std::exp(static_cast<double>(row[cs1]))),
                   static_cast<float>(std::exp(static_cast<double>(row[cs2])))};
        g.rotation =
            Quatf{row[cr0], row[cr1], row[cr2], row[cr3]}.normalized();
        g.sh.assign(std::size_t(coeffs) * 3, 0.0f);
        g.sh[0] = row[cdc0];
        g.sh[1] = row[cdc1];
        g.sh[2] = row[cdc2];
        // f_rest is channel-major in the file: all of R, then G, then B.
        for (int c = 0; c < 3; ++c)
            for (int k = 1; k < coeffs; ++k)
                g.sh[std::size_t(k) * 3 + c] =
                    row[crest[c * per_channel + (k - 1)]];
        out.gaussians.push_back(std::move(g));
    }
    return out;
}

PlyLoadResult load_ply_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return load_ply(in);
}

void save_ply(const std::vector<Gaussian3D>& gaussians, std::ostream& out) {
    const int degree = gaussians.empty() ? 0 : sh_degree(gaussians.front());
    if (degree < 0) throw IoError("save_ply: invalid SH coefficient count");
    for (const auto& g : gaussians)
        if (sh_degree(g) != degree)
            throw IoError("save_ply: mixed SH degrees");
    const int coeffs = (degree + 1) * (degree + 1);
    const int rest = 3 * (coeffs - 1);

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << gaussians.size() << "\n";
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz"})
        out << "property float " << n << "\n";
    for (int i = 0; i < 3; ++i) out << "property float f_dc_" << i << "\n";
    for (int i = 0; i < rest; ++i) out << "property float f_rest_" << i << "\n";
    out << "property float opacity\n";
    for (int i = 0; i < 3; ++i) out << "property float scale_" << i << "\n";
    for (int i = 0; i < 4; ++i) out << "property float rot_" << i << "\n";
    out << "end_header\n";

    std::vector<float> row;
    for (const auto& g : gaussians) {
        row.clear();
        row.insert(row.end(), {g.mean.x, g.mean.y, g.mean.z, 0.0f, 0.0f, 0.0f});
        row.insert(row.end(), {g.sh[0], g.sh[1], g.sh[2]});
        for (int c = 0; c < 3; ++c)
            for (int k = 1; k < coeffs; ++k)
                row.push_back(g.sh[std::size_t(k) * 3 + c]);
        row.push_back(static_cast<float>(logit(g.opacity)));
        row.push_back(static_cast<float>(std::log(static_cast<double>(g.scale.x))));
        row.push_back(static_cast<float>(std::log(static_cast<double>(g.scale.y))));
        row.push_back(static_cast<float>(std::log(static_cast<double>(g.scale.z))));
        row.insert(row.end(),
                   {g.rotation.w, g.rotation.x, g.rotation.y, g.rotation.z});
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw IoError("save_ply: write failure");
}

void save_ply_file(const std::vector<Gaussian3D>& gaussians,
                   const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_ply(gaussians, out);
}

CameraLoadResult load_cameras(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("cameras: invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw IoError("cameras: top-level value must be an array");

    CameraLoadResult out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        auto fail = [&](const std::string& why) {
            out.errors.push_back("entry " + std::to_string(i) + ": " + why);
            ++out.rejected;
        };
        try {
            Camera cam;
            cam.width = e.at("width").get<int>();
            cam.height = e.at("height").get<int>();
            cam.fx = e.at("fx").get<float>();
            cam.fy = e.at("fy").get<float>();
            const auto& pos = e.at("position");
            cam.position = {pos.at(0).get<float>(), pos.at(1).get<float>(),
                            pos.at(2).get<float>()};
            const auto& rot = e.at("rotation");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    cam.rotation(r, c) = rot.at(r).at(c).get<float>();

            const float drift = orthonormality_drift(cam.rotation);
            if (drift >= 1e-2f) {
                fail("rotation drift " + std::to_string(drift) + " >= 0.01");
                continue;
            }
            if (drift > 1e-5f) cam.rotation = orthonormalize(cam.rotation);
            const std::string bad = validate(cam);
            if (!bad.empty()) {
                fail(bad);
                continue;
            }
            out.cameras.push_back(cam);
        } catch (const nlohmann::json::exception& ex) {
            throw IoError("cameras: entry " + std::to_string(i) + ": " +
                          ex.what());
        }
    }
    return out;
}

CameraLoadResult load_cameras_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_cameras(buf.str());
}

void write_image(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(std::size_t(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const float v = std::clamp(img.at(x, y, c), 0.0f, 1.0f);
                row[std::size_t(x) * 3 + c] = static_cast<unsigned char>(
                    std::lround(static_cast<double>(v) * 255.0));
            }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

Image load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255)
        throw IoError("'" + path + "' is not an 8-bit P6 PPM");
    in.get();  // single whitespace after maxval
    Image img(w, h);
    std::vector<unsigned char> buf(std::size_t(w) * h * 3);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (!in) throw IoError("'" + path + "': truncated pixel data");
    for (std::size_t i = 0; i < buf.size(); ++i)
        img.data[i] = static_cast<float>(buf[i]) / 255.0f;
    return img;
}

}  // namespace ags
