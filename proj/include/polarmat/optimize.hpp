// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "polarmat/image.hpp"
#include "polarmat/objectives.hpp"
#include "polarmat/solvers.hpp"
#include "polarmat/ward.hpp"

namespace polarmat {

/// One solver configuration per problem kind.
struct SolverSet {
    std::array<SolverConfig, 5> configs;

    /// lbfgs-backtracking for normals, lbfgs-zoom for albedos, gauss-newton
    /// for sigma.
    static SolverSet defaults();

    SolverConfig& operator[](ProblemKind k) { return configs[static_cast<int>(k)]; }
    const SolverConfig& operator[](ProblemKind k) const { return configs[static_cast<int>(k)]; }
};

struct NormalFit {
    Direction3 normal = Vec3::Zero();
    double correlation = 0.0;
    SolveResult diag;
};

/// Maximizes the correlation between the Lambertian model and the diffuse
/// observations. Starting point is `n_init`; the tangent chart is re-centred
/// when the iterate drifts far from its reference.
NormalFit refine_diffuse_normal(const PixelProblem& problem, const Direction3& n_init, const SolverConfig& config);

/// Same with the mirror-direction model omega_r . omega_o.
NormalFit refine_specular_normal(const PixelProblem& problem, const Direction3& n_init, const SolverConfig& config);

/// Correlation-weighted blend of two normals; weights are the correlations
/// clamped at zero. Falls back to the higher-correlation normal when the
/// blend degenerates.
Direction3 fuse_normals(const Direction3& n_d, const Direction3& n_s, double corr_d, double corr_s);
NormalMap fuse_normals(const NormalMap& n_d, const NormalMap& n_s, const ScalarMap& corr_d, const ScalarMap& corr_s);

struct SigmaFit {
    WardLobe lobe;
    SolveResult diag;
};

/// Fits the lobe shape (log-parameterized) in `frame`, starting from
/// `init`. The normal fixing the frame is taken from frame.n.
SigmaFit fit_sigma(const PixelProblem& problem, const ShadingFrame& frame, const SolverConfig& config,
                   const WardLobe& init = WardLobe{});

struct AnisotropyRoughness {
    double anisotropy = 0.0;  ///< (sx - sy) / (sx + sy)
    double roughness = 0.0;   ///< sx^2 + sy^2
};

AnisotropyRoughness derive_anisotropy_roughness(const WardLobe& lobe);

struct AlbedoFit {
    Rgb albedo = Rgb::Zero();  ///< specular fits fill all three entries with the scalar
    bool clamped = false;      ///< a negative estimate was clamped to zero
    SolveResult diag;
};

/// Linear least squares for the albedo. Diffuse fits use `normal`; specular
/// fits use the Ward lobe `lobe` in `frame` (required for that kind).
AlbedoFit refine_albedo(const PixelProblem& problem, const Direction3& normal, const std::optional<WardLobe>& lobe,
                        const SolverConfig& config, const std::optional<ShadingFrame>& frame = std::nullopt);

/// Result of one problem in a batch.
struct PixelSolution {
    ProblemKind kind = ProblemKind::DiffuseNormal;
    Direction3 normal = Vec3::Zero();
    double correlation = 0.0;
    WardLobe lobe{0.0, 0.0};
    Rgb albedo = Rgb::Zero();
    bool clamped = false;
    SolveResult diag;
};

struct DiagnosticRow {
    long long pixel = 0;
    ProblemKind kind = ProblemKind::DiffuseNormal;
    Backend backend = Backend::LbfgsZoom;
    int iterations = 0;
    double gradient_norm = 0.0;
    SolveStatus status = SolveStatus::Converged;
};

struct BatchResult {
    std::vector<PixelSolution> solutions;
    std::vector<DiagnosticRow> diagnostics;
    double wall_seconds = 0.0;  ///< informational only, never written to bundles
};

/// Solves every problem with `config` (each problem's own kind decides the
/// objective). Under-determined problems are flagged without solving.
/// `pixels` optionally labels the diagnostics rows; defaults to the index.
BatchResult solve_batch(std::span<const PixelProblem> problems, const SolverConfig& config, int threads = 1,
                        std::span<const long long> pixels = {});

/// Solves one problem; the building block of solve_batch.
PixelSolution solve_problem(const PixelProblem& problem, const SolverConfig& config);

/// CSV with header pixel,kind,backend,iterations,grad_norm,status.
void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticRow> rows);

}  // namespace polarmat
