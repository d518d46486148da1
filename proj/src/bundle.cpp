// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/bundle.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "polarmat/pfm.hpp"

namespace polarmat {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kBundleVersion = 1;

// Every file a bundle may contain, so that stale ones can be removed.
const char* const kBundleFiles[] = {
    "diffuse_sequence.pfm", "specular_sequence.pfm", "removed_diffuse.pfm", "removed_specular.pfm",
    "ambient_d.pfm",        "ambient_s.pfm",         "visibility_d.pfm",    "visibility_s.pfm",
    "tau_d.pfm",            "tau_s.pfm",             "interreflection_d.pfm", "interreflection_s.pfm",
    "rho_d_init.pfm",       "rho_s_init.pfm",        "n_d_init.pfm",        "n_s_init.pfm",
    "flags.pfm",            "n_d.pfm",               "n_s.pfm",             "normal.pfm",
    "correlation_d.pfm",    "correlation_s.pfm",     "sigma_x.pfm",         "sigma_y.pfm",
    "anisotropy.pfm",       "roughness.pfm",         "rho_d.pfm",           "rho_s.pfm",
    "rho_d_unshadowed.pfm", "rho_s_unshadowed.pfm",  "diagnostics.csv",
};

constexpr std::optional<double> kOpen = std::nullopt;

PfmImage mask_to_pfm(const LightMask& m) {
    PfmImage img{m.count(), m.height() * m.width(), 1, std::vector<float>(m.values().size())};
    for (std::size_t i = 0; i < m.values().size(); ++i) img.data[i] = m.values()[i] ? 1.0f : 0.0f;
    return img;
}

LightMask mask_from_pfm(const PfmImage& img, int height, int width) {
    if (img.channels != 1 || img.width <= 0 || img.height != height * width)
        throw Error(ErrorCode::DimensionMismatch, "visibility mask does not match the bundle size");
    LightMask m(height, width, img.width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int k = 0; k < img.width; ++k) m.set(y, x, k, img.at(y * width + x, k, 0) != 0.0f);
    return m;
}

PfmImage removed_to_pfm(const std::vector<unsigned char>& removed, const ImageStack& like) {
    PfmImage img{like.width(), like.count() * like.height(), 3, std::vector<float>(removed.size())};
    for (std::size_t i = 0; i < removed.size(); ++i) img.data[i] = removed[i] ? 1.0f : 0.0f;
    return img;
}

std::vector<unsigned char> removed_from_pfm(const PfmImage& img, const ImageStack& like) {
    if (img.data.size() != like.values().size())
        throw Error(ErrorCode::DimensionMismatch, "removed mask does not match the sequence size");
    std::vector<unsigned char> out(img.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.data[i] != 0.0f;
    return out;
}

PfmImage flags_to_pfm(const Grid<unsigned char>& f) {
    PfmImage img{f.width(), f.height(), 1, std::vector<float>(f.size())};
    for (std::size_t i = 0; i < f.size(); ++i) img.data[i] = f[i];
    return img;
}

Grid<unsigned char> flags_from_pfm(const PfmImage& img) {
    const ScalarMap m = scalar_map(img);
    Grid<unsigned char> f(m.height(), m.width());
    for (std::size_t i = 0; i < m.size(); ++i) f[i] = static_cast<unsigned char>(m[i]);
    return f;
}

class BundleWriter {
public:
    explicit BundleWriter(const fs::path& dir) : dir_(dir) {}

    void add(const std::string& name, const PfmImage& img, std::optional<double> lo, std::optional<double> hi,
             bool unit = false, const std::string& layout = "map") {
        const std::string file = name + ".pfm";
        write_pfm(dir_ / file, img);
        maps_.push_back({name, file, img.width, img.height, img.channels, lo, hi, unit, layout});
    }

    const std::vector<MapInfo>& maps() const { return maps_; }

private:
    fs::path dir_;
    std::vector<MapInfo> maps_;
};

json solvers_json(const SolverSet& s) {
    json out = json::object();
    for (ProblemKind k : kAllProblemKinds) {
        const auto& c = s[k];
        out[std::string(to_string(k))] = {{"backend", std::string(to_string(c.backend))},
                                          {"max_iterations", c.max_iterations},
                                          {"gradient_tolerance", c.gradient_tolerance},
                                          {"history", c.history}};
    }
    return out;
}

// Thread count is deliberately absent: bundles do not depend on it.
json provenance_json(const MaterialBundle& b) {
    json stages = json::object();
    stages["separate"] = json::object();
    if (b.has(Stage::Preprocess))
        stages["preprocess"] = {{"epsilon", b.config.overexposure.epsilon},
                                {"iterations", b.config.overexposure.iterations}};
    if (b.has(Stage::Init)) stages["init"] = json::object();
    if (b.has(Stage::Optimize))
        stages["optimize"] = {{"solvers", solvers_json(b.config.solvers)},
                              {"shadow_floor", b.config.shadow_floor},
                              {"sigma_init", {b.config.sigma_init.sigma_x, b.config.sigma_init.sigma_y}},
                              {"specular_normal_gate", b.config.specular_normal_gate}};
    return {{"tool_version", b.provenance.tool_version},
            {"manifest_hash", b.provenance.manifest_hash},
            {"stages", stages}};
}

json read_json(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, path.string() + " does not exist");
    std::ifstream in(path, std::ios::binary);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<DiagnosticRow> read_diagnostics(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path.string() + " does not exist");
    std::vector<DiagnosticRow> rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[6];
        for (auto& s : f) std::getline(ss, s, ',');
        DiagnosticRow r;
        try {
            r.pixel = std::stoll(f[0]);
            r.kind = parse_problem_kind(f[1]);
            r.backend = parse_backend(f[2]);
            r.iterations = std::stoi(f[3]);
            r.gradient_norm = std::stod(f[4]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, path.string() + ": bad row '" + line + "'");
        }
        bool known = false;
        for (SolveStatus s : {SolveStatus::Converged, SolveStatus::MaxIterations, SolveStatus::LineSearchFailure,
                              SolveStatus::Underdetermined, SolveStatus::Degenerate})
            if (to_string(s) == f[5]) r.status = s, known = true;
        if (!known) throw Error(ErrorCode::ParseError, path.string() + ": unknown status '" + f[5] + "'");
        rows.push_back(r);
    }
    return rows;
}

NormalMap manifest_views(const CaptureManifest& m) {
    NormalMap out(m.height, m.width);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) out(y, x) = m.view_direction ? *m.view_direction : m.pose->view_direction(x, y);
    return out;
}

}  // namespace

void write_bundle(const fs::path& dir, const MaterialBundle& b) {
    fs::create_directories(dir);
    for (const char* f : kBundleFiles) fs::remove(dir / f);

    BundleWriter w(dir);
    const auto& seq = b.sequences;
    w.add("diffuse_sequence", stack_to_pfm(seq.diffuse), 0.0, kOpen, false, "stack");
    w.add("specular_sequence", stack_to_pfm(seq.specular), 0.0, kOpen, false, "stack");
    if (b.has(Stage::Preprocess)) {
        w.add("removed_diffuse", removed_to_pfm(seq.removed_diffuse, seq.diffuse), 0.0, 1.0, false, "stack");
        w.add("removed_specular", removed_to_pfm(seq.removed_specular, seq.specular), 0.0, 1.0, false, "stack");
    }
    if (b.ambient) {
        w.add("ambient_d", to_pfm(b.ambient->diffuse), 0.0, kOpen);
        w.add("ambient_s", to_pfm(b.ambient->specular), 0.0, kOpen);
    }
    if (b.geometry) {
        const auto& g = *b.geometry;
        w.add("visibility_d", mask_to_pfm(g.visibility_d), 0.0, 1.0, false, "mask");
        w.add("visibility_s", mask_to_pfm(g.visibility_s), 0.0, 1.0, false, "mask");
        w.add("tau_d", to_pfm(g.tau_d), 0.0, 4.0);
        w.add("tau_s", to_pfm(g.tau_s), 0.0, 4.0);
        w.add("interreflection_d", to_pfm(g.interreflection_d), 0.0, kOpen);
        w.add("interreflection_s", to_pfm(g.interreflection_s), 0.0, kOpen);
    }
    if (b.init) {
        const auto& i = *b.init;
        w.add("rho_d_init", to_pfm(i.rho_d), 0.0, kOpen);
        w.add("rho_s_init", to_pfm(i.rho_s), 0.0, kOpen);
        w.add("n_d_init", to_pfm(i.n_d), -1.0, 1.0, true);
        w.add("n_s_init", to_pfm(i.n_s), -1.0, 1.0, true);
    }
    if (!b.flags.empty()) w.add("flags", flags_to_pfm(b.flags), 0.0, 63.0);
    if (b.refined) {
        const auto& r = *b.refined;
        ScalarMap sx(b.height, b.width), sy(b.height, b.width);
        for (std::size_t i = 0; i < r.sigma.size(); ++i) {
            sx[i] = r.sigma[i].sigma_x;
            sy[i] = r.sigma[i].sigma_y;
        }
        w.add("n_d", to_pfm(r.n_d), -1.0, 1.0, true);
        w.add("n_s", to_pfm(r.n_s), -1.0, 1.0, true);
        w.add("normal", to_pfm(r.normal), -1.0, 1.0, true);
        w.add("correlation_d", to_pfm(r.correlation_d), -1.0, 1.0);
        w.add("correlation_s", to_pfm(r.correlation_s), -1.0, 1.0);
        w.add("sigma_x", to_pfm(sx), 0.0, kOpen);
        w.add("sigma_y", to_pfm(sy), 0.0, kOpen);
        w.add("anisotropy", to_pfm(r.anisotropy), -1.0, 1.0);
        w.add("roughness", to_pfm(r.roughness), 0.0, kOpen);
        w.add("rho_d", to_pfm(r.rho_d), 0.0, kOpen);
        w.add("rho_s", to_pfm(r.rho_s), 0.0, kOpen);
        w.add("rho_d_unshadowed", to_pfm(r.rho_d_unshadowed), 0.0, kOpen);
        w.add("rho_s_unshadowed", to_pfm(r.rho_s_unshadowed), 0.0, kOpen);
        std::ostringstream csv;
        write_diagnostics_csv(csv, b.diagnostics);
        write_text(dir / "diagnostics.csv", csv.str());
    }

    json maps = json::array();
    for (const auto& m : w.maps()) {
        json range = json::array({m.lo ? json(*m.lo) : json(nullptr), m.hi ? json(*m.hi) : json(nullptr)});
        maps.push_back({{"name", m.name},
                        {"file", m.file},
                        {"width", m.width},
                        {"height", m.height},
                        {"channels", m.channels},
                        {"range", range},
                        {"unit_norm", m.unit_norm},
                        {"layout", m.layout}});
    }
    const json index = {{"format", "polarmat-bundle"}, {"version", kBundleVersion},
                        {"last_stage", std::string(to_string(b.last_stage))},
                        {"count", b.count},   {"height", b.height},
                        {"width", b.width},   {"maps", maps}};
    write_text(dir / "bundle.json", index.dump(2) + "\n");
    write_text(dir / "provenance.json", provenance_json(b).dump(2) + "\n");
}

std::vector<MapInfo> read_bundle_index(const fs::path& dir) {
    const json j = read_json(dir / "bundle.json");
    try {
        if (j.at("format") != "polarmat-bundle") throw Error(ErrorCode::ParseError, "not a polarmat bundle");
        if (j.at("version").get<int>() != kBundleVersion)
            throw Error(ErrorCode::UnsupportedVersion, "bundle version " + j.at("version").dump());
        std::vector<MapInfo> out;
        for (const auto& m : j.at("maps")) {
            MapInfo info;
            info.name = m.at("name").get<std::string>();
            info.file = m.at("file").get<std::string>();
            info.width = m.at("width").get<int>();
            info.height = m.at("height").get<int>();
            info.channels = m.at("channels").get<int>();
            const auto& r = m.at("range");
            if (!r.at(0).is_null()) info.lo = r.at(0).get<double>();
            if (!r.at(1).is_null()) info.hi = r.at(1).get<double>();
            info.unit_norm = m.at("unit_norm").get<bool>();
            info.layout = m.at("layout").get<std::string>();
            out.push_back(std::move(info));
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, (dir / "bundle.json").string() + ": " + e.what());
    }
}

MaterialBundle read_bundle(const fs::path& dir) {
    const json j = read_json(dir / "bundle.json");
    const auto index = read_bundle_index(dir);
    MaterialBundle b;
    try {
        b.last_stage = parse_stage(j.at("last_stage").get<std::string>());
        b.count = j.at("count").get<int>();
        b.height = j.at("height").get<int>();
        b.width = j.at("width").get<int>();
        const json p = read_json(dir / "provenance.json");
        b.provenance.tool_version = p.at("tool_version").get<std::string>();
        b.provenance.manifest_hash = p.at("manifest_hash").get<std::string>();
        if (auto it = p.at("stages").find("preprocess"); it != p.at("stages").end()) {
            b.config.overexposure.epsilon = it->at("epsilon").get<double>();
            b.config.overexposure.iterations = it->at("iterations").get<int>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, dir.string() + ": " + e.what());
    }

    std::map<std::string, MapInfo> by_name;
    for (const auto& m : index) by_name[m.name] = m;
    auto load = [&](const std::string& name) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw Error(ErrorCode::MissingFile, dir.string() + ": bundle has no map '" + name + "'");
        PfmImage img = read_pfm(dir / it->second.file);
        if (img.width != it->second.width || img.height != it->second.height || img.channels != it->second.channels)
            throw Error(ErrorCode::DimensionMismatch, it->second.file + " does not match bundle.json");
        return img;
    };
    auto check = [&](const auto& map, const std::string& name) {
        if (!map.same_shape(b.height, b.width))
            throw Error(ErrorCode::DimensionMismatch, name + " does not match the bundle size");
        return map;
    };

    auto& seq = b.sequences;
    seq.diffuse = stack_from_pfm(load("diffuse_sequence"), b.count);
    seq.specular = stack_from_pfm(load("specular_sequence"), b.count);
    if (seq.diffuse.height() != b.height || seq.diffuse.width() != b.width || !seq.diffuse.same_shape(seq.specular))
        throw Error(ErrorCode::DimensionMismatch, "sequences do not match the bundle size");
    if (b.has(Stage::Preprocess)) {
        seq.removed_diffuse = removed_from_pfm(load("removed_diffuse"), seq.diffuse);
        seq.removed_specular = removed_from_pfm(load("removed_specular"), seq.specular);
        b.ambient = AmbientMaps{check(rgb_map(load("ambient_d")), "ambient_d"),
                                check(rgb_map(load("ambient_s")), "ambient_s")};
        GeometryMaps g;
        g.visibility_d = mask_from_pfm(load("visibility_d"), b.height, b.width);
        g.visibility_s = mask_from_pfm(load("visibility_s"), b.height, b.width);
        g.tau_d = check(scalar_map(load("tau_d")), "tau_d");
        g.tau_s = check(scalar_map(load("tau_s")), "tau_s");
        g.interreflection_d = check(rgb_map(load("interreflection_d")), "interreflection_d");
        g.interreflection_s = check(scalar_map(load("interreflection_s")), "interreflection_s");
        b.geometry = std::move(g);
    } else {
        seq.removed_diffuse.assign(seq.diffuse.values().size(), 0);
        seq.removed_specular.assign(seq.specular.values().size(), 0);
    }
    if (b.has(Stage::Init)) {
        InitialEstimates i;
        i.rho_d = check(rgb_map(load("rho_d_init")), "rho_d_init");
        i.rho_s = check(scalar_map(load("rho_s_init")), "rho_s_init");
        i.n_d = check(normal_map(load("n_d_init")), "n_d_init");
        i.n_s = check(normal_map(load("n_s_init")), "n_s_init");
        b.flags = check(flags_from_pfm(load("flags")), "flags");
        b.init = std::move(i);
        // Init flags are the only ones present before optimize.
        b.init->flags = b.flags;
    }
    if (b.has(Stage::Optimize)) {
        RefinedMaterial r;
        r.n_d = check(normal_map(load("n_d")), "n_d");
        r.n_s = check(normal_map(load("n_s")), "n_s");
        r.normal = check(normal_map(load("normal")), "normal");
        r.correlation_d = check(scalar_map(load("correlation_d")), "correlation_d");
        r.correlation_s = check(scalar_map(load("correlation_s")), "correlation_s");
        const ScalarMap sx = check(scalar_map(load("sigma_x")), "sigma_x");
        const ScalarMap sy = check(scalar_map(load("sigma_y")), "sigma_y");
        r.sigma = Grid<WardLobe>(b.height, b.width, WardLobe{0.0, 0.0});
        for (std::size_t i = 0; i < sx.size(); ++i) r.sigma[i] = {sx[i], sy[i]};
        r.anisotropy = check(scalar_map(load("anisotropy")), "anisotropy");
        r.roughness = check(scalar_map(load("roughness")), "roughness");
        r.rho_d = check(rgb_map(load("rho_d")), "rho_d");
        r.rho_s = check(scalar_map(load("rho_s")), "rho_s");
        r.rho_d_unshadowed = check(rgb_map(load("rho_d_unshadowed")), "rho_d_unshadowed");
        r.rho_s_unshadowed = check(scalar_map(load("rho_s_unshadowed")), "rho_s_unshadowed");
        b.refined = std::move(r);
        b.diagnostics = read_diagnostics(dir / "diagnostics.csv");
    }
    return b;
}

std::vector<std::string> check_bundle(const fs::path& dir, double unit_tolerance) {
    std::vector<std::string> problems;
    for (const auto& m : read_bundle_index(dir)) {
        const PfmImage img = read_pfm(dir / m.file);
        std::size_t out_of_range = 0, not_unit = 0;
        for (float v : img.data)
            if ((m.lo && v < *m.lo) || (m.hi && v > *m.hi)) ++out_of_range;
        if (m.unit_norm && img.channels == 3)
            for (std::size_t i = 0; i < img.data.size(); i += 3) {
                const double n = std::sqrt(double(img.data[i]) * img.data[i] + double(img.data[i + 1]) * img.data[i + 1] +
                                           double(img.data[i + 2]) * img.data[i + 2]);
                if (n != 0.0 && std::abs(n - 1.0) > unit_tolerance) ++not_unit;
            }
        if (out_of_range)
            problems.push_back(m.name + ": " + std::to_string(out_of_range) + " values outside the declared range");
        if (not_unit) problems.push_back(m.name + ": " + std::to_string(not_unit) + " vectors are not unit length");
    }
    return problems;
}

PipelineConfig pipeline_config(const CaptureManifest& m) {
    PipelineConfig c;
    c.overexposure = m.overexposure;
    c.solvers = m.solvers;
    return c;
}

std::string manifest_hash(const CaptureManifest& m) { return fnv1a_hex(dump_manifest(m)); }

MaterialBundle run_pipeline(const CaptureManifest& manifest, const PipelineConfig& config, Stage last,
                            const fs::path& out_dir) {
    const PolarizedOLATStack capture = read_stack(manifest);
    MaterialBundle b = process(capture, config, last);
    b.provenance.manifest_hash = manifest_hash(manifest);
    write_bundle(out_dir, b);
    return b;
}

MaterialBundle run_pipeline(const fs::path& manifest_path, Stage last, const fs::path& out_dir) {
    const CaptureManifest m = read_manifest(manifest_path);
    return run_pipeline(m, pipeline_config(m), last, out_dir);
}

MaterialBundle continue_pipeline(const CaptureManifest& manifest, const PipelineConfig& config, const fs::path& in_dir,
                                 Stage last, const fs::path& out_dir) {
    MaterialBundle b = read_bundle(in_dir);
    const std::string hash = manifest_hash(manifest);
    if (b.provenance.manifest_hash != hash)
        throw Error(ErrorCode::InvalidArgument, "bundle in " + in_dir.string() + " was produced from a different manifest");
    if (b.count != manifest.count || b.height != manifest.height || b.width != manifest.width)
        throw Error(ErrorCode::DimensionMismatch, "bundle does not match the manifest dimensions");
    if (b.has(Stage::Preprocess) && (b.config.overexposure.epsilon != config.overexposure.epsilon ||
                                     b.config.overexposure.iterations != config.overexposure.iterations))
        throw Error(ErrorCode::InvalidArgument, "bundle was preprocessed with different overexposure parameters");
    b.config = config;
    RgbMap ambient;
    if (!manifest.ambient_file.empty()) ambient = rgb_map(read_pfm(manifest.resolve(manifest.ambient_file)));
    resume(b, manifest.rig, manifest_views(manifest), ambient, last);
    write_bundle(out_dir, b);
    return b;
}

}  // namespace polarmat
