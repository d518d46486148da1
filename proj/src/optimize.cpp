// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/optimize.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "polarmat/parallel.hpp"

namespace polarmat {

SolverSet SolverSet::defaults() {
    SolverSet s;
    s[ProblemKind::DiffuseNormal].backend = Backend::LbfgsBacktracking;
    s[ProblemKind::SpecularNormal].backend = Backend::LbfgsBacktracking;
    s[ProblemKind::Sigma].backend = Backend::GaussNewton;
    s[ProblemKind::DiffuseAlbedo].backend = Backend::LbfgsZoom;
    s[ProblemKind::SpecularAlbedo].backend = Backend::LbfgsZoom;
    return s;
}

namespace {

SolveResult flagged(SolveStatus status, int dimension) {
    SolveResult r;
    r.x = VecX::Zero(dimension);
    r.status = status;
    return r;
}

void expect_kind(const PixelProblem& p, ProblemKind kind) {
    if (p.kind != kind)
        throw Error(ErrorCode::InvalidArgument, "expected a " + std::string(to_string(kind)) + " problem, got " +
                                                    std::string(to_string(p.kind)));
}

NormalFit refine_normal(const PixelProblem& problem, const Direction3& n_init, const SolverConfig& config) {
    NormalFit fit;
    fit.normal = normalized(n_init);
    if (!problem.determined()) {
        fit.diag = flagged(SolveStatus::Underdetermined, 2);
        return fit;
    }
    constexpr int kMaxCharts = 8;
    constexpr double kRecentre = 0.25;
    Direction3 reference = fit.normal;
    int iterations = 0, evaluations = 0;
    for (int round = 0; round < kMaxCharts; ++round) {
        const NormalObjective objective(problem, reference);
        SolveResult r = minimize(objective, VecX::Zero(2), config);
        iterations += r.iterations;
        evaluations += r.evaluations;
        fit.normal = objective.normal_at(r.x);
        const bool drifted = r.x.norm() > kRecentre;
        fit.diag = std::move(r);
        if (!drifted) break;
        reference = fit.normal;
    }
    fit.diag.iterations = iterations;
    fit.diag.evaluations = evaluations;
    fit.correlation = NormalObjective(problem, fit.normal).correlation(fit.normal);
    return fit;
}

}  // namespace

NormalFit refine_diffuse_normal(const PixelProblem& problem, const Direction3& n_init, const SolverConfig& config) {
    expect_kind(problem, ProblemKind::DiffuseNormal);
    return refine_normal(problem, n_init, config);
}

NormalFit refine_specular_normal(const PixelProblem& problem, const Direction3& n_init, const SolverConfig& config) {
    expect_kind(problem, ProblemKind::SpecularNormal);
    return refine_normal(problem, n_init, config);
}

Direction3 fuse_normals(const Direction3& n_d, const Direction3& n_s, double corr_d, double corr_s) {
    const double wd = std::isfinite(corr_d) ? std::max(corr_d, 0.0) : 0.0;
    const double ws = std::isfinite(corr_s) ? std::max(corr_s, 0.0) : 0.0;
    const Direction3& fallback = corr_s > corr_d ? n_s : n_d;
    if (wd + ws <= 0.0) return fallback;
    const Vec3 blend = (wd * n_d + ws * n_s) / (wd + ws);
    if (!(blend.norm() > 1e-9)) return fallback;
    return blend.normalized();
}

NormalMap fuse_normals(const NormalMap& n_d, const NormalMap& n_s, const ScalarMap& corr_d, const ScalarMap& corr_s) {
    const int h = n_d.height(), w = n_d.width();
    if (!n_s.same_shape(h, w) || !corr_d.same_shape(h, w) || !corr_s.same_shape(h, w))
        throw Error(ErrorCode::DimensionMismatch, "fusion inputs differ in size");
    NormalMap out(h, w, Vec3::Zero());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fuse_normals(n_d[i], n_s[i], corr_d[i], corr_s[i]);
    return out;
}

SigmaFit fit_sigma(const PixelProblem& problem, const ShadingFrame& frame, const SolverConfig& config,
                   const WardLobe& init) {
    expect_kind(problem, ProblemKind::Sigma);
    if (!init.valid()) throw Error(ErrorCode::InvalidArgument, "initial sigma must be positive");
    SigmaFit fit;
    fit.lobe = init;
    if (!problem.determined()) {
        fit.diag = flagged(SolveStatus::Underdetermined, 2);
        return fit;
    }
    if (!(problem.omega_o.dot(frame.n) > 0.0)) {
        fit.diag = flagged(SolveStatus::Degenerate, 2);
        return fit;
    }
    PixelProblem local = problem;
    local.frame = frame;
    const SigmaObjective objective(local);
    fit.diag = minimize(objective, Eigen::Vector2d(std::log(init.sigma_x), std::log(init.sigma_y)), config);
    fit.lobe = {std::exp(fit.diag.x[0]), std::exp(fit.diag.x[1])};
    return fit;
}

AnisotropyRoughness derive_anisotropy_roughness(const WardLobe& lobe) {
    if (!lobe.valid()) throw Error(ErrorCode::InvalidArgument, "Ward sigma must be positive");
    return {(lobe.sigma_x - lobe.sigma_y) / (lobe.sigma_x + lobe.sigma_y),
            lobe.sigma_x * lobe.sigma_x + lobe.sigma_y * lobe.sigma_y};
}

AlbedoFit refine_albedo(const PixelProblem& problem, const Direction3& normal, const std::optional<WardLobe>& lobe,
                        const SolverConfig& config, const std::optional<ShadingFrame>& frame) {
    const bool diffuse = problem.kind == ProblemKind::DiffuseAlbedo;
    if (!diffuse) expect_kind(problem, ProblemKind::SpecularAlbedo);
    AlbedoFit fit;
    const int dim = diffuse ? 3 : 1;
    if (!problem.determined()) {
        fit.diag = flagged(SolveStatus::Underdetermined, dim);
        return fit;
    }
    PixelProblem local = problem;
    local.normal = normalized(normal);
    if (!diffuse) {
        if (!lobe) throw Error(ErrorCode::InvalidArgument, "specular albedo needs a fitted lobe");
        local.lobe = *lobe;
        local.frame = frame ? *frame : shading_frame(local.normal);
        if (!(local.omega_o.dot(local.frame.n) > 0.0)) {
            fit.diag = flagged(SolveStatus::Degenerate, dim);
            return fit;
        }
    }
    const AlbedoObjective objective(local);
    fit.diag = minimize(objective, VecX::Zero(dim), config);
    for (int c = 0; c < 3; ++c) {
        double v = fit.diag.x[diffuse ? c : 0];
        if (v < 0.0) {
            v = 0.0;
            fit.clamped = true;
        }
        fit.albedo[c] = v;
    }
    return fit;
}

PixelSolution solve_problem(const PixelProblem& problem, const SolverConfig& config) {
    PixelSolution s;
    s.kind = problem.kind;
    switch (problem.kind) {
        case ProblemKind::DiffuseNormal:
        case ProblemKind::SpecularNormal: {
            if (problem.normal.squaredNorm() == 0.0) {
                s.diag = flagged(SolveStatus::Degenerate, 2);
                break;
            }
            auto fit = refine_normal(problem, problem.normal, config);
            s.normal = fit.normal;
            s.correlation = fit.correlation;
            s.diag = std::move(fit.diag);
            break;
        }
        case ProblemKind::Sigma: {
            auto fit = fit_sigma(problem, problem.frame, config, problem.lobe);
            s.normal = problem.frame.n;
            s.lobe = fit.lobe;
            s.diag = std::move(fit.diag);
            break;
        }
        case ProblemKind::DiffuseAlbedo:
        case ProblemKind::SpecularAlbedo: {
            if (problem.normal.squaredNorm() == 0.0) {
                s.diag = flagged(SolveStatus::Degenerate, problem.kind == ProblemKind::DiffuseAlbedo ? 3 : 1);
                break;
            }
            auto fit = refine_albedo(problem, problem.normal, problem.lobe, config, problem.frame);
            s.normal = problem.normal;
            s.albedo = fit.albedo;
            s.clamped = fit.clamped;
            s.diag = std::move(fit.diag);
            break;
        }
    }
    return s;
}

BatchResult solve_batch(std::span<const PixelProblem> problems, const SolverConfig& config, int threads,
                        std::span<const long long> pixels) {
    config.validate();
    if (!pixels.empty() && pixels.size() != problems.size())
        throw Error(ErrorCode::LengthMismatch, "pixel labels do not match the problem count");
    const auto start = std::chrono::steady_clock::now();
    BatchResult out;
    out.solutions.resize(problems.size());
    out.diagnostics.resize(problems.size());
    parallel_for(static_cast<int>(problems.size()), threads, [&](int i) {
        out.solutions[i] = solve_problem(problems[i], config);
        const auto& d = out.solutions[i].diag;
        out.diagnostics[i] = {pixels.empty() ? i : pixels[i], problems[i].kind, config.backend, d.iterations,
                              d.gradient_norm, d.status};
    });
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows) {
    out << "pixel,kind,backend,iterations,grad_norm,status\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.9e", r.gradient_norm);
        out << r.pixel << ',' << to_string(r.kind) << ',' << to_string(r.backend) << ',' << r.iterations << ','
            << buf << ',' << to_string(r.status) << '\n';
    }
}

}  // namespace polarmat
