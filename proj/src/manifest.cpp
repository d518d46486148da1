// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polarmat/pfm.hpp"

namespace polarmat {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ParseError, "manifest field '" + key + "': " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

template <class T>
T get(const json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        parse_fail(path, e.what());
    }
}

Vec3 get_vec3(const json& j, const std::string& path) {
    const auto v = get<std::vector<double>>(j, path);
    if (v.size() != 3) parse_fail(path, "expected 3 numbers");
    return {v[0], v[1], v[2]};
}

Mat3 get_mat3(const json& j, const std::string& path) {
    const auto rows = get<std::vector<std::vector<double>>>(j, path);
    if (rows.size() != 3) parse_fail(path, "expected a 3x3 matrix");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (rows[r].size() != 3) parse_fail(path, "expected a 3x3 matrix");
        for (int c = 0; c < 3; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

json to_json(const SolverConfig& c) {
    return {{"backend", std::string(to_string(c.backend))},
            {"max_iterations", c.max_iterations},
            {"gradient_tolerance", c.gradient_tolerance},
            {"history", c.history},
            {"line_search",
             {{"c1", c.line_search.c1},
              {"c2", c.line_search.c2},
              {"decrease_factor", c.line_search.decrease_factor},
              {"max_steps", c.line_search.max_steps},
              {"max_step_length", c.line_search.max_step_length}}}};
}

// Unlisted keys keep the values already in `c`.
void read_solver(const json& j, const std::string& path, SolverConfig& c) {
    if (!j.is_object()) parse_fail(path, "expected an object");
    if (auto it = j.find("backend"); it != j.end()) {
        const auto name = get<std::string>(*it, path + ".backend");
        try {
            c.backend = parse_backend(name);
        } catch (const Error& e) {
            parse_fail(path + ".backend", e.what());
        }
    }
    if (auto it = j.find("max_iterations"); it != j.end()) c.max_iterations = get<int>(*it, path + ".max_iterations");
    if (auto it = j.find("gradient_tolerance"); it != j.end())
        c.gradient_tolerance = get<double>(*it, path + ".gradient_tolerance");
    if (auto it = j.find("history"); it != j.end()) c.history = get<int>(*it, path + ".history");
    if (auto it = j.find("line_search"); it != j.end()) {
        const std::string p = path + ".line_search";
        if (auto f = it->find("c1"); f != it->end()) c.line_search.c1 = get<double>(*f, p + ".c1");
        if (auto f = it->find("c2"); f != it->end()) c.line_search.c2 = get<double>(*f, p + ".c2");
        if (auto f = it->find("decrease_factor"); f != it->end())
            c.line_search.decrease_factor = get<double>(*f, p + ".decrease_factor");
        if (auto f = it->find("max_steps"); f != it->end()) c.line_search.max_steps = get<int>(*f, p + ".max_steps");
        if (auto f = it->find("max_step_length"); f != it->end())
            c.line_search.max_step_length = get<double>(*f, p + ".max_step_length");
    }
    try {
        c.validate();
    } catch (const Error& e) {
        parse_fail(path, e.what());
    }
}

std::vector<std::string> get_files(const json& files, const std::string& key) {
    return get<std::vector<std::string>>(field(files, key, "files"), "files." + key);
}

bool same_pose(const CameraPose& a, const CameraPose& b) {
    return a.rotation == b.rotation && a.translation == b.translation && a.intrinsics == b.intrinsics;
}

bool same_solver(const SolverConfig& a, const SolverConfig& b) {
    return a.backend == b.backend && a.max_iterations == b.max_iterations &&
           a.gradient_tolerance == b.gradient_tolerance && a.history == b.history &&
           a.line_search.c1 == b.line_search.c1 && a.line_search.c2 == b.line_search.c2 &&
           a.line_search.decrease_factor == b.line_search.decrease_factor &&
           a.line_search.max_steps == b.line_search.max_steps &&
           a.line_search.max_step_length == b.line_search.max_step_length;
}

std::string frame_name(const char* dir, int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s/%04d.pfm", dir, k);
    return buf;
}

}  // namespace

bool same_manifest(const CaptureManifest& a, const CaptureManifest& b) {
    if (a.version != b.version || a.count != b.count || a.height != b.height || a.width != b.width) return false;
    if (a.rig.directions != b.rig.directions || a.rig.l0 != b.rig.l0 || a.rig.a0 != b.rig.a0 ||
        a.rig.generator != b.rig.generator)
        return false;
    if (a.cross_files != b.cross_files || a.parallel_files != b.parallel_files || a.ambient_file != b.ambient_file)
        return false;
    if (a.pose.has_value() != b.pose.has_value() || (a.pose && !same_pose(*a.pose, *b.pose))) return false;
    if (a.view_direction != b.view_direction) return false;
    if (a.overexposure.epsilon != b.overexposure.epsilon || a.overexposure.iterations != b.overexposure.iterations)
        return false;
    for (std::size_t i = 0; i < a.solvers.configs.size(); ++i)
        if (!same_solver(a.solvers.configs[i], b.solvers.configs[i])) return false;
    return true;
}

CaptureManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "manifest must be a JSON object");

    CaptureManifest m;
    m.base_dir = base_dir;
    m.version = get<int>(field(j, "version", ""), "version");
    if (m.version != kManifestVersion)
        throw Error(ErrorCode::UnsupportedVersion, "manifest version " + std::to_string(m.version) +
                                                       " is not supported (expected " +
                                                       std::to_string(kManifestVersion) + ")");

    m.count = get<int>(field(j, "count", ""), "count");
    m.height = get<int>(field(j, "height", ""), "height");
    m.width = get<int>(field(j, "width", ""), "width");
    if (m.count < 4) parse_fail("count", "need at least 4 lights");
    if (m.height < 1 || m.width < 1) parse_fail("height/width", "image size must be positive");

    const json& lights = field(j, "lights", "");
    if (auto g = lights.find("generator"); g != lights.end()) {
        const auto name = get<std::string>(*g, "lights.generator");
        if (name != "fibonacci-spiral") parse_fail("lights.generator", "unknown generator '" + name + "'");
        m.rig = LightRig::spiral(m.count);
    } else {
        const auto& dirs = field(lights, "directions", "lights");
        if (!dirs.is_array()) parse_fail("lights.directions", "expected an array");
        for (std::size_t i = 0; i < dirs.size(); ++i)
            m.rig.directions.push_back(get_vec3(dirs[i], "lights.directions[" + std::to_string(i) + "]"));
        if (m.rig.size() != m.count)
            throw Error(ErrorCode::DimensionMismatch, "manifest declares " + std::to_string(m.count) +
                                                          " lights but lists " + std::to_string(m.rig.size()) +
                                                          " directions");
    }
    m.rig.l0 = j.contains("l0") ? get<double>(j["l0"], "l0") : 1.0;
    m.rig.a0 = j.contains("a0") ? get<double>(j["a0"], "a0") : 4.0 * kPi / m.count;
    try {
        m.rig.validate();
    } catch (const Error& e) {
        parse_fail("lights", e.what());
    }

    const json& files = field(j, "files", "");
    m.cross_files = get_files(files, "cross");
    m.parallel_files = get_files(files, "parallel");

    if (auto c = j.find("camera"); c != j.end()) {
        CameraPose pose;
        pose.rotation = get_mat3(field(*c, "rotation", "camera"), "camera.rotation");
        pose.translation = get_vec3(field(*c, "translation", "camera"), "camera.translation");
        pose.intrinsics = get_mat3(field(*c, "intrinsics", "camera"), "camera.intrinsics");
        try {
            pose.validate();
        } catch (const Error& e) {
            parse_fail("camera", e.what());
        }
        m.pose = pose;
    }
    if (auto v = j.find("view_direction"); v != j.end()) {
        const Vec3 d = get_vec3(*v, "view_direction");
        if (std::abs(d.norm() - 1.0) > 1e-9) parse_fail("view_direction", "not unit length");
        m.view_direction = d;
    }
    if (m.pose.has_value() == m.view_direction.has_value())
        parse_fail("camera", "exactly one of 'camera' and 'view_direction' is required");

    if (auto a = j.find("ambient"); a != j.end() && !a->is_null()) m.ambient_file = get<std::string>(*a, "ambient");

    if (auto o = j.find("overexposure"); o != j.end()) {
        if (auto e = o->find("epsilon"); e != o->end()) m.overexposure.epsilon = get<double>(*e, "overexposure.epsilon");
        if (auto it = o->find("iterations"); it != o->end())
            m.overexposure.iterations = get<int>(*it, "overexposure.iterations");
        if (!(m.overexposure.epsilon > 0.0)) parse_fail("overexposure.epsilon", "must be positive");
        if (m.overexposure.iterations < 1) parse_fail("overexposure.iterations", "must be at least 1");
    }

    if (auto s = j.find("solvers"); s != j.end()) {
        if (!s->is_object()) parse_fail("solvers", "expected an object");
        for (const auto& [key, value] : s->items()) {
            ProblemKind kind;
            try {
                kind = parse_problem_kind(key);
            } catch (const Error& e) {
                parse_fail("solvers." + key, e.what());
            }
            read_solver(value, "solvers." + key, m.solvers[kind]);
        }
    }
    return m;
}

std::string dump_manifest(const CaptureManifest& m) {
    json j;
    j["version"] = m.version;
    j["count"] = m.count;
    j["height"] = m.height;
    j["width"] = m.width;
    if (m.rig.generator == "fibonacci-spiral") {
        j["lights"] = {{"generator", m.rig.generator}};
    } else {
        json dirs = json::array();
        for (const auto& d : m.rig.directions) dirs.push_back(to_json(d));
        j["lights"] = {{"directions", dirs}};
    }
    j["l0"] = m.rig.l0;
    j["a0"] = m.rig.a0;
    j["files"] = {{"cross", m.cross_files}, {"parallel", m.parallel_files}};
    if (m.pose)
        j["camera"] = {{"rotation", to_json(m.pose->rotation)},
                       {"translation", to_json(m.pose->translation)},
                       {"intrinsics", to_json(m.pose->intrinsics)}};
    if (m.view_direction) j["view_direction"] = to_json(*m.view_direction);
    if (!m.ambient_file.empty()) j["ambient"] = m.ambient_file;
    j["overexposure"] = {{"epsilon", m.overexposure.epsilon}, {"iterations", m.overexposure.iterations}};
    json solvers = json::object();
    for (ProblemKind k : kAllProblemKinds) solvers[std::string(to_string(k))] = to_json(m.solvers[k]);
    j["solvers"] = solvers;
    return j.dump(2) + "\n";
}

void validate_files(const CaptureManifest& m) {
    auto check_list = [&](const std::vector<std::string>& files, const char* name) {
        if (static_cast<int>(files.size()) < m.count)
            throw Error(ErrorCode::MissingFile, std::string(name) + " image for light index " +
                                                    std::to_string(files.size()) + " is not listed (" +
                                                    std::to_string(files.size()) + " of " + std::to_string(m.count) +
                                                    " files)");
        if (static_cast<int>(files.size()) > m.count)
            throw Error(ErrorCode::DimensionMismatch, std::string(name) + " lists " + std::to_string(files.size()) +
                                                          " files for " + std::to_string(m.count) + " lights");
    };
    check_list(m.cross_files, "cross");
    check_list(m.parallel_files, "parallel");

    auto check_file = [&](const std::string& file, const std::string& what) {
        const auto path = m.resolve(file);
        if (!std::filesystem::exists(path))
            throw Error(ErrorCode::MissingFile, what + " (" + path.string() + ") does not exist");
        const PfmHeader h = read_pfm_header(path);
        if (h.width != m.width || h.height != m.height || h.channels != 3)
            throw Error(ErrorCode::DimensionMismatch,
                        what + " is " + std::to_string(h.width) + "x" + std::to_string(h.height) + "x" +
                            std::to_string(h.channels) + ", expected " + std::to_string(m.width) + "x" +
                            std::to_string(m.height) + "x3");
    };
    for (int k = 0; k < m.count; ++k) {
        check_file(m.cross_files[k], "cross image for light index " + std::to_string(k));
        check_file(m.parallel_files[k], "parallel image for light index " + std::to_string(k));
    }
    if (!m.ambient_file.empty()) check_file(m.ambient_file, "ambient image");
}

CaptureManifest read_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, path.string() + " does not exist");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    CaptureManifest m = parse_manifest(ss.str(), path.parent_path());
    validate_files(m);
    return m;
}

void write_manifest(const std::filesystem::path& path, const CaptureManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << dump_manifest(m);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string manifest_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

PolarizedOLATStack read_stack(const CaptureManifest& m) {
    PolarizedOLATStack s;
    s.cross = ImageStack(m.count, m.height, m.width);
    s.parallel = ImageStack(m.count, m.height, m.width);
    for (int k = 0; k < m.count; ++k) {
        frame_from_pfm(s.cross, k, read_pfm(m.resolve(m.cross_files.at(k))));
        frame_from_pfm(s.parallel, k, read_pfm(m.resolve(m.parallel_files.at(k))));
    }
    s.rig = m.rig;
    if (m.pose) s.pose = *m.pose;
    s.fixed_view = m.view_direction;
    if (!m.ambient_file.empty()) {
        s.ambient = rgb_map(read_pfm(m.resolve(m.ambient_file)));
        if (!s.ambient.same_shape(m.height, m.width))
            throw Error(ErrorCode::DimensionMismatch, "ambient image does not match the capture size");
    }
    s.validate();
    return s;
}

void write_stack(const CaptureManifest& m, const PolarizedOLATStack& s) {
    if (s.count() != m.count || s.height() != m.height || s.width() != m.width ||
        !s.cross.same_shape(s.parallel))
        throw Error(ErrorCode::DimensionMismatch, "stack does not match the manifest dimensions");
    if (static_cast<int>(m.cross_files.size()) != m.count || static_cast<int>(m.parallel_files.size()) != m.count)
        throw Error(ErrorCode::DimensionMismatch, "manifest file lists do not match the light count");
    auto write = [&](const std::string& file, const PfmImage& img) {
        const auto path = m.resolve(file);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        write_pfm(path, img);
    };
    for (int k = 0; k < m.count; ++k) {
        write(m.cross_files[k], frame_to_pfm(s.cross, k));
        write(m.parallel_files[k], frame_to_pfm(s.parallel, k));
    }
    if (!m.ambient_file.empty()) {
        if (s.ambient.empty()) throw Error(ErrorCode::InvalidArgument, "manifest names an ambient image but the stack has none");
        write(m.ambient_file, to_pfm(s.ambient));
    }
}

CaptureManifest default_manifest(const PolarizedOLATStack& s, const std::filesystem::path& dir) {
    CaptureManifest m;
    m.count = s.count();
    m.height = s.height();
    m.width = s.width();
    m.rig = s.rig;
    for (int k = 0; k < m.count; ++k) {
        m.cross_files.push_back(frame_name("cross", k));
        m.parallel_files.push_back(frame_name("parallel", k));
    }
    if (s.fixed_view)
        m.view_direction = *s.fixed_view;
    else
        m.pose = s.pose;
    if (!s.ambient.empty()) m.ambient_file = "ambient.pfm";
    m.base_dir = dir;
    return m;
}

std::filesystem::path write_capture(const std::filesystem::path& dir, const PolarizedOLATStack& stack,
                                    const OverexposureConfig& overexposure, const SolverSet& solvers) {
    stack.validate();
    std::filesystem::create_directories(dir);
    CaptureManifest m = default_manifest(stack, dir);
    m.overexposure = overexposure;
    m.solvers = solvers;
    write_stack(m, stack);
    const auto path = dir / "manifest.json";
    write_manifest(path, m);
    return path;
}

}  // namespace polarmat
