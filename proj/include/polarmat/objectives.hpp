// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "polarmat/core.hpp"
#include "polarmat/solvers.hpp"
#include "polarmat/ward.hpp"

namespace polarmat {

enum class ProblemKind {
    DiffuseNormal,
    SpecularNormal,
    Sigma,
    DiffuseAlbedo,
    SpecularAlbedo,
};

/// diffuse-normal, specular-normal, sigma, diffuse-albedo, specular-albedo.
std::string_view to_string(ProblemKind k);
ProblemKind parse_problem_kind(std::string_view name);

inline constexpr ProblemKind kAllProblemKinds[] = {ProblemKind::DiffuseNormal, ProblemKind::SpecularNormal,
                                                   ProblemKind::Sigma, ProblemKind::DiffuseAlbedo,
                                                   ProblemKind::SpecularAlbedo};

/// One pixel's fitting problem. Only samples in front of `normal` are
/// stored; the normal kinds additionally drop samples at or below ambient.
struct PixelProblem {
    ProblemKind kind = ProblemKind::DiffuseNormal;
    std::vector<Rgb> observations;
    std::vector<Direction3> directions;
    Direction3 omega_o = Vec3::UnitZ();
    double radiance_scale = 1.0;  ///< L0 A0 of the rig
    /// Start normal for the normal kinds, fixed normal for the others.
    Direction3 normal = Vec3::UnitZ();
    /// Shading frame of the sigma and specular-albedo kinds.
    ShadingFrame frame;
    /// Start lobe for sigma, fixed lobe for specular-albedo.
    WardLobe lobe;

    int size() const { return static_cast<int>(observations.size()); }
    bool determined() const { return size() >= 3; }
};

/// Builds a problem from a full-length signal, keeping the samples with
/// normal . omega_k > 0. For the normal kinds a sample must also exceed
/// `zeta` in some channel (the visibility gate). The shading frame defaults
/// to shading_frame(normal).
PixelProblem make_problem(ProblemKind kind, std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig,
                          const Direction3& omega_o, const Direction3& normal);

/// Correlation objective over unit normals, parameterized in the tangent
/// chart n(u) = normalize(n0 + E u) of the reference normal n0. The value is
/// 1 - N(m) . N(o) with m_k = n . omega_k (diffuse) or m_k = omega_r . omega_o
/// (specular).
class NormalObjective final : public Objective {
public:
    NormalObjective(const PixelProblem& problem, const Direction3& reference);

    int dimension() const override { return 2; }
    double value(const VecX& u) const override;
    double value_and_gradient(const VecX& u, VecX& gradient) const override;

    Direction3 normal_at(const VecX& u) const;
    double correlation(const Direction3& n) const;

private:
    double evaluate(const VecX& u, VecX* gradient) const;

    const PixelProblem& problem_;
    Direction3 n0_;
    Eigen::Matrix<double, 3, 2> basis_;
    std::vector<double> obs_;  // normalized luminance observations
    bool specular_;
};

/// Residuals N(f_sigma) - N(o) over (log sigma_x, log sigma_y).
class SigmaObjective final : public Objective {
public:
    explicit SigmaObjective(const PixelProblem& problem);

    int dimension() const override { return 2; }
    double value(const VecX& x) const override;
    double value_and_gradient(const VecX& x, VecX& gradient) const override;
    bool has_residuals() const override { return true; }
    void residuals(const VecX& x, VecX& r, MatX* jacobian) const override;

private:
    const PixelProblem& problem_;
    std::vector<double> obs_;
};

/// Linear albedo fit 0.5 |rho b - o|^2. The diffuse kind has three
/// independent channels (b_k = L0 A0 n . omega_k); the specular kind is
/// scalar on luminance (b_k = L0 A0 f_sigma).
class AlbedoObjective final : public Objective {
public:
    explicit AlbedoObjective(const PixelProblem& problem);

    int dimension() const override { return channels_; }
    double value(const VecX& x) const override;
    double value_and_gradient(const VecX& x, VecX& gradient) const override;
    bool has_residuals() const override { return true; }
    void residuals(const VecX& x, VecX& r, MatX* jacobian) const override;

    /// Closed form sum(b o) / sum(b^2) per channel.
    VecX closed_form() const;
    const std::vector<double>& basis() const { return basis_; }

private:
    int channels_;
    std::vector<double> basis_;
    MatX obs_;  // size x channels
};

std::unique_ptr<Objective> make_objective(const PixelProblem& problem);

/// Natural start point of the problem's objective.
VecX start_point(const PixelProblem& problem);

}  // namespace polarmat
