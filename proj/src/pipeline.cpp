// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/pipeline.hpp"

#include <cmath>
#include <sstream>

namespace polarmat {

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Separate: return "separate";
        case Stage::Preprocess: return "preprocess";
        case Stage::Init: return "init";
        case Stage::Optimize: return "optimize";
    }
    return "unknown";
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::Separate, Stage::Preprocess, Stage::Init, Stage::Optimize})
        if (to_string(s) == name) return s;
    throw Error(ErrorCode::InvalidArgument, "unknown stage '" + std::string(name) + "'");
}

Stage parse_stage_list(std::string_view list) {
    if (list == "all") return Stage::Optimize;
    std::optional<Stage> last;
    std::stringstream ss{std::string(list)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const Stage s = parse_stage(item);
        if (!last || static_cast<int>(s) > static_cast<int>(*last)) last = s;
    }
    if (!last) throw Error(ErrorCode::InvalidArgument, "empty stage list");
    return *last;
}

void PipelineConfig::validate() const {
    if (!(overexposure.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (overexposure.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");
    if (threads < 1) throw Error(ErrorCode::InvalidArgument, "threads must be at least 1");
    if (!(shadow_floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "shadow floor must be positive");
    if (!sigma_init.valid()) throw Error(ErrorCode::InvalidArgument, "initial sigma must be positive");
    for (const auto& c : solvers.configs) c.validate();
}

namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

void quantize(ScalarMap& m) {
    for (auto& v : m.values()) v = to_f32(v);
}

template <class V>
void quantize(Grid<V>& m) {
    for (auto& v : m.values())
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = to_f32(v[i]);
}

void quantize(Grid<WardLobe>& m) {
    for (auto& v : m.values()) v = {to_f32(v.sigma_x), to_f32(v.sigma_y)};
}

template <class F>
void run_stage(Stage s, F&& body) {
    try {
        body();
    } catch (const Error& e) {
        throw e.with_context("stage '" + std::string(to_string(s)) + "'");
    } catch (const std::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "stage '" + std::string(to_string(s)) + "': " + e.what());
    }
}

void check_views(const MaterialBundle& b, const LightRig& rig, const NormalMap& views) {
    if (rig.size() != b.count || !views.same_shape(b.height, b.width))
        throw Error(ErrorCode::DimensionMismatch, "rig or view map does not match the bundle");
}

void run_preprocess(MaterialBundle& b, const LightRig& rig, const NormalMap& views, const RgbMap& measured) {
    const int threads = b.config.threads;
    SeparatedStack separated{std::move(b.sequences.diffuse), std::move(b.sequences.specular)};
    b.sequences = clean_stack(separated, b.config.overexposure, threads);
    AmbientMaps zeta = ambient_gates(b.sequences, measured, threads);
    quantize(zeta.diffuse);
    quantize(zeta.specular);
    b.ambient = std::move(zeta);
    // First geometry pass uses the closed-form normals.
    const InitialEstimates first = initialize(b.sequences, rig, views, threads);
    b.geometry = compute_geometry(b.sequences, {first.n_d, first.n_s}, *b.ambient, rig, threads);
    quantize(b.geometry->tau_d);
    quantize(b.geometry->tau_s);
    quantize(b.geometry->interreflection_d);
    quantize(b.geometry->interreflection_s);
}

void run_init(MaterialBundle& b, const LightRig& rig, const NormalMap& views) {
    InitialEstimates init = initialize(b.sequences, rig, views, b.config.threads);
    quantize(init.rho_d);
    quantize(init.rho_s);
    quantize(init.n_d);
    quantize(init.n_s);
    b.flags = init.flags;
    b.init = std::move(init);
}

// A line search that stalls with a gradient below sqrt(tol) has hit the
// precision floor of the objective and is not flagged.
unsigned char solve_flags(const SolveResult& d, const SolverConfig& config) {
    switch (d.status) {
        case SolveStatus::Underdetermined: return kFlagUnderdetermined;
        case SolveStatus::MaxIterations: return kFlagNotConverged;
        case SolveStatus::LineSearchFailure:
            return d.gradient_norm > std::sqrt(config.gradient_tolerance) ? kFlagNotConverged : kFlagNone;
        default: return kFlagNone;
    }
}

// Solves one problem kind over the listed pixels and appends diagnostics.
std::vector<PixelSolution> solve_kind(MaterialBundle& b, ProblemKind kind, const std::vector<PixelProblem>& problems,
                                      const std::vector<long long>& pixels) {
    auto batch = solve_batch(problems, b.config.solvers[kind], b.config.threads, pixels);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        b.flags[pixels[i]] |= solve_flags(batch.solutions[i].diag, b.config.solvers[kind]);
        if (batch.solutions[i].clamped) b.flags[pixels[i]] |= kFlagClamped;
    }
    b.diagnostics.insert(b.diagnostics.end(), batch.diagnostics.begin(), batch.diagnostics.end());
    return std::move(batch.solutions);
}

void run_optimize(MaterialBundle& b, const LightRig& rig, const NormalMap& views) {
    const int h = b.height, w = b.width;
    const auto& seq = b.sequences;
    const auto& zeta = *b.ambient;
    const auto& init = *b.init;
    b.flags = init.flags;
    b.diagnostics.clear();

    RefinedMaterial r;
    r.n_d = NormalMap(h, w);
    r.n_s = NormalMap(h, w);
    r.correlation_d = ScalarMap(h, w);
    r.correlation_s = ScalarMap(h, w);
    r.sigma = Grid<WardLobe>(h, w, WardLobe{0.0, 0.0});
    r.anisotropy = ScalarMap(h, w);
    r.roughness = ScalarMap(h, w);
    r.rho_d = RgbMap(h, w);
    r.rho_s = ScalarMap(h, w);

    auto px = [w](long long i) { return std::pair<int, int>{static_cast<int>(i / w), static_cast<int>(i % w)}; };
    const long long total = static_cast<long long>(h) * w;

    // Normals.
    std::vector<PixelProblem> problems;
    std::vector<long long> pixels;
    for (long long i = 0; i < total; ++i) {
        if (b.flags[i] & kFlagDegenerateDiffuse) continue;
        const auto [y, x] = px(i);
        problems.push_back(make_problem(ProblemKind::DiffuseNormal, seq.diffuse.pixel(y, x), zeta.diffuse(y, x), rig,
                                        views(y, x), init.n_d(y, x)));
        pixels.push_back(i);
    }
    auto sol = solve_kind(b, ProblemKind::DiffuseNormal, problems, pixels);
    for (std::size_t j = 0; j < pixels.size(); ++j) {
        if (sol[j].diag.status == SolveStatus::Underdetermined) continue;
        r.n_d[pixels[j]] = sol[j].normal;
        r.correlation_d[pixels[j]] = sol[j].correlation;
    }

    problems.clear();
    pixels.clear();
    for (long long i = 0; i < total; ++i) {
        if (b.flags[i] & (kFlagDegenerateSpecular | kFlagBackFacing)) continue;
        const auto [y, x] = px(i);
        const Rgb gate = b.config.specular_normal_gate ? zeta.specular(y, x) : Rgb::Constant(-1.0);
        problems.push_back(
            make_problem(ProblemKind::SpecularNormal, seq.specular.pixel(y, x), gate, rig, views(y, x), init.n_s(y, x)));
        pixels.push_back(i);
    }
    sol = solve_kind(b, ProblemKind::SpecularNormal, problems, pixels);
    for (std::size_t j = 0; j < pixels.size(); ++j) {
        if (sol[j].diag.status == SolveStatus::Underdetermined) continue;
        r.n_s[pixels[j]] = sol[j].normal;
        r.correlation_s[pixels[j]] = sol[j].correlation;
    }
    r.normal = fuse_normals(r.n_d, r.n_s, r.correlation_d, r.correlation_s);

    // Lobe shape, in the frame of the fused normal.
    problems.clear();
    pixels.clear();
    for (long long i = 0; i < total; ++i) {
        const auto [y, x] = px(i);
        if (r.n_s[i].isZero() || !(r.normal[i].dot(views(y, x)) > 0.0)) continue;
        PixelProblem p = make_problem(ProblemKind::Sigma, seq.specular.pixel(y, x), zeta.specular(y, x), rig,
                                      views(y, x), r.normal[i]);
        p.lobe = b.config.sigma_init;
        problems.push_back(std::move(p));
        pixels.push_back(i);
    }
    sol = solve_kind(b, ProblemKind::Sigma, problems, pixels);
    for (std::size_t j = 0; j < pixels.size(); ++j) {
        if (sol[j].diag.status == SolveStatus::Underdetermined) continue;
        const long long i = pixels[j];
        r.sigma[i] = sol[j].lobe;
        const auto ar = derive_anisotropy_roughness(sol[j].lobe);
        r.anisotropy[i] = ar.anisotropy;
        r.roughness[i] = ar.roughness;
    }

    // Albedos.
    problems.clear();
    pixels.clear();
    for (long long i = 0; i < total; ++i) {
        if (r.n_d[i].isZero()) continue;
        const auto [y, x] = px(i);
        problems.push_back(make_problem(ProblemKind::DiffuseAlbedo, seq.diffuse.pixel(y, x), zeta.diffuse(y, x), rig,
                                        views(y, x), r.n_d[i]));
        pixels.push_back(i);
    }
    sol = solve_kind(b, ProblemKind::DiffuseAlbedo, problems, pixels);
    for (std::size_t j = 0; j < pixels.size(); ++j) r.rho_d[pixels[j]] = sol[j].albedo;

    problems.clear();
    pixels.clear();
    for (long long i = 0; i < total; ++i) {
        if (!r.sigma[i].valid()) continue;
        const auto [y, x] = px(i);
        PixelProblem p = make_problem(ProblemKind::SpecularAlbedo, seq.specular.pixel(y, x), zeta.specular(y, x), rig,
                                      views(y, x), r.normal[i]);
        p.lobe = r.sigma[i];
        problems.push_back(std::move(p));
        pixels.push_back(i);
    }
    sol = solve_kind(b, ProblemKind::SpecularAlbedo, problems, pixels);
    for (std::size_t j = 0; j < pixels.size(); ++j) r.rho_s[pixels[j]] = sol[j].albedo[0];

    // Second geometry pass with the refined normals.
    b.geometry = compute_geometry(seq, {r.n_d, r.n_s}, zeta, rig, b.config.threads);
    r.rho_d_unshadowed = shadow_compensate(r.rho_d, b.geometry->tau_d, b.config.shadow_floor);
    r.rho_s_unshadowed = shadow_compensate(r.rho_s, b.geometry->tau_s, b.config.shadow_floor);

    quantize(b.geometry->tau_d);
    quantize(b.geometry->tau_s);
    quantize(b.geometry->interreflection_d);
    quantize(b.geometry->interreflection_s);
    quantize(r.n_d);
    quantize(r.n_s);
    quantize(r.normal);
    quantize(r.correlation_d);
    quantize(r.correlation_s);
    quantize(r.sigma);
    quantize(r.anisotropy);
    quantize(r.roughness);
    quantize(r.rho_d);
    quantize(r.rho_s);
    quantize(r.rho_d_unshadowed);
    quantize(r.rho_s_unshadowed);
    b.refined = std::move(r);
}

}  // namespace

void resume(MaterialBundle& bundle, const LightRig& rig, const NormalMap& views, const RgbMap& measured_ambient,
            Stage last) {
    bundle.config.validate();
    check_views(bundle, rig, views);
    auto next = [&](Stage s) { return !bundle.has(s) && static_cast<int>(s) <= static_cast<int>(last); };
    if (next(Stage::Preprocess)) {
        run_stage(Stage::Preprocess, [&] { run_preprocess(bundle, rig, views, measured_ambient); });
        bundle.last_stage = Stage::Preprocess;
    }
    if (next(Stage::Init)) {
        run_stage(Stage::Init, [&] { run_init(bundle, rig, views); });
        bundle.last_stage = Stage::Init;
    }
    if (next(Stage::Optimize)) {
        run_stage(Stage::Optimize, [&] { run_optimize(bundle, rig, views); });
        bundle.last_stage = Stage::Optimize;
    }
}

void resume(MaterialBundle& bundle, const PolarizedOLATStack& capture, Stage last) {
    resume(bundle, capture.rig, capture.view_directions(), capture.ambient, last);
}

MaterialBundle process(const PolarizedOLATStack& capture, const PipelineConfig& config, Stage last) {
    config.validate();
    MaterialBundle b;
    b.config = config;
    b.count = capture.count();
    b.height = capture.height();
    b.width = capture.width();
    run_stage(Stage::Separate, [&] {
        auto sep = separate_stack(capture, config.threads);
        b.sequences.diffuse = std::move(sep.diffuse);
        b.sequences.specular = std::move(sep.specular);
        b.sequences.removed_diffuse.assign(b.sequences.diffuse.values().size(), 0);
        b.sequences.removed_specular.assign(b.sequences.specular.values().size(), 0);
    });
    b.last_stage = Stage::Separate;
    resume(b, capture, last);
    return b;
}

}  // namespace polarmat
