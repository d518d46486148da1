// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/objectives.hpp"

#include <cmath>

#include "polarmat/preprocess.hpp"

namespace polarmat {

std::string_view to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::DiffuseNormal: return "diffuse-normal";
        case ProblemKind::SpecularNormal: return "specular-normal";
        case ProblemKind::Sigma: return "sigma";
        case ProblemKind::DiffuseAlbedo: return "diffuse-albedo";
        case ProblemKind::SpecularAlbedo: return "specular-albedo";
    }
    return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
    for (ProblemKind k : kAllProblemKinds)
        if (to_string(k) == name) return k;
    throw Error(ErrorCode::InvalidArgument, "unknown problem kind '" + std::string(name) + "'");
}

PixelProblem make_problem(ProblemKind kind, std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig,
                          const Direction3& omega_o, const Direction3& normal) {
    if (static_cast<int>(signal.size()) != rig.size())
        throw Error(ErrorCode::LengthMismatch, "signal length does not match the rig");
    PixelProblem p;
    p.kind = kind;
    p.omega_o = omega_o;
    p.radiance_scale = rig.l0 * rig.a0;
    p.normal = normal;
    if (normal.squaredNorm() > 0.0) p.frame = shading_frame(normal);
    const bool gated = kind == ProblemKind::DiffuseNormal || kind == ProblemKind::SpecularNormal;
    for (std::size_t k = 0; k < signal.size(); ++k) {
        if (normal.dot(rig.directions[k]) > 0.0 && (!gated || above_ambient(signal[k], zeta))) {
            p.observations.push_back(signal[k]);
            p.directions.push_back(rig.directions[k]);
        }
    }
    return p;
}

namespace {

std::vector<double> normalized_luminance(const std::vector<Rgb>& obs) {
    std::vector<double> out(obs.size());
    double norm2 = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        out[k] = luminance(obs[k]);
        norm2 += out[k] * out[k];
    }
    const double norm = std::sqrt(norm2);
    if (norm > 0.0)
        for (auto& v : out) v /= norm;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

NormalObjective::NormalObjective(const PixelProblem& problem, const Direction3& reference)
    : problem_(problem), n0_(normalized(reference)), obs_(normalized_luminance(problem.observations)),
      specular_(problem.kind == ProblemKind::SpecularNormal) {
    if (problem.kind != ProblemKind::DiffuseNormal && problem.kind != ProblemKind::SpecularNormal)
        throw Error(ErrorCode::InvalidArgument, "normal objective needs a normal problem");
    const ShadingFrame f = shading_frame(n0_);
    basis_.col(0) = f.t;
    basis_.col(1) = f.b;
}

Direction3 NormalObjective::normal_at(const VecX& u) const { return (n0_ + basis_ * u).normalized(); }

double NormalObjective::correlation(const Direction3& n) const {
    double mo = 0.0, mm = 0.0;
    const Vec3& wo = problem_.omega_o;
    const double n_wo = n.dot(wo);
    for (std::size_t k = 0; k < obs_.size(); ++k) {
        const Vec3& wi = problem_.directions[k];
        const double m = specular_ ? 2.0 * wi.dot(n) * n_wo - wi.dot(wo) : n.dot(wi);
        mo += m * obs_[k];
        mm += m * m;
    }
    return mm > 0.0 ? mo / std::sqrt(mm) : 0.0;
}

double NormalObjective::evaluate(const VecX& u, VecX* gradient) const {
    const Vec3 v = n0_ + basis_ * u;
    const double vnorm = v.norm();
    const Vec3 n = v / vnorm;
    const Vec3& wo = problem_.omega_o;
    const double n_wo = n.dot(wo);
    const std::size_t count = obs_.size();

    std::vector<double> m(count);
    double mo = 0.0, mm = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const Vec3& wi = problem_.directions[k];
        m[k] = specular_ ? 2.0 * wi.dot(n) * n_wo - wi.dot(wo) : n.dot(wi);
        mo += m[k] * obs_[k];
        mm += m[k] * m[k];
    }
    if (!(mm > 0.0)) {
        if (gradient) *gradient = VecX::Zero(2);
        return 1.0;
    }
    const double mnorm = std::sqrt(mm);
    const double corr = mo / mnorm;
    if (gradient) {
        Vec3 dc_dn = Vec3::Zero();
        for (std::size_t k = 0; k < count; ++k) {
            const double dc_dm = obs_[k] / mnorm - corr * m[k] / mm;
            const Vec3& wi = problem_.directions[k];
            const Vec3 dm_dn = specular_ ? Vec3(2.0 * (n_wo * wi + wi.dot(n) * wo)) : wi;
            dc_dn += dc_dm * dm_dn;
        }
        const Eigen::Matrix<double, 3, 2> dn_du = (Mat3::Identity() - n * n.transpose()) * basis_ / vnorm;
        *gradient = -(dn_du.transpose() * dc_dn);
    }
    return 1.0 - corr;
}

double NormalObjective::value(const VecX& u) const { return evaluate(u, nullptr); }

double NormalObjective::value_and_gradient(const VecX& u, VecX& gradient) const { return evaluate(u, &gradient); }

// ---------------------------------------------------------------------------

SigmaObjective::SigmaObjective(const PixelProblem& problem)
    : problem_(problem), obs_(normalized_luminance(problem.observations)) {
    if (problem.kind != ProblemKind::Sigma) throw Error(ErrorCode::InvalidArgument, "sigma objective needs a sigma problem");
}

void SigmaObjective::residuals(const VecX& x, VecX& r, MatX* jacobian) const {
    const WardLobe lobe{std::exp(x[0]), std::exp(x[1])};
    const std::size_t count = obs_.size();
    std::vector<double> logf(count, -std::numeric_limits<double>::infinity());
    std::vector<double> dx(count, 0.0), dy(count, 0.0);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k) {
        if (const auto t = ward_log_terms(problem_.directions[k], problem_.omega_o, lobe, problem_.frame)) {
            logf[k] = t->log_value;
            dx[k] = t->d_log_sx;
            dy[k] = t->d_log_sy;
            peak = std::max(peak, logf[k]);
        }
    }
    r.resize(static_cast<Eigen::Index>(count));
    if (!std::isfinite(peak)) {
        for (std::size_t k = 0; k < count; ++k) r[k] = -obs_[k];
        if (jacobian) *jacobian = MatX::Zero(static_cast<Eigen::Index>(count), 2);
        return;
    }
    std::vector<double> fhat(count);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        fhat[k] = std::exp(logf[k] - peak);
        norm2 += fhat[k] * fhat[k];
    }
    const double norm = std::sqrt(norm2);
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        fhat[k] /= norm;
        mean_x += fhat[k] * fhat[k] * dx[k];
        mean_y += fhat[k] * fhat[k] * dy[k];
        r[k] = fhat[k] - obs_[k];
    }
    if (jacobian) {
        jacobian->resize(static_cast<Eigen::Index>(count), 2);
        for (std::size_t k = 0; k < count; ++k) {
            (*jacobian)(k, 0) = fhat[k] * (dx[k] - mean_x);
            (*jacobian)(k, 1) = fhat[k] * (dy[k] - mean_y);
        }
    }
}

double SigmaObjective::value(const VecX& x) const {
    VecX r;
    residuals(x, r, nullptr);
    return 0.5 * r.squaredNorm();
}

double SigmaObjective::value_and_gradient(const VecX& x, VecX& gradient) const {
    VecX r;
    MatX J;
    residuals(x, r, &J);
    gradient = J.transpose() * r;
    return 0.5 * r.squaredNorm();
}

// ---------------------------------------------------------------------------

AlbedoObjective::AlbedoObjective(const PixelProblem& problem) {
    const bool diffuse = problem.kind == ProblemKind::DiffuseAlbedo;
    if (!diffuse && problem.kind != ProblemKind::SpecularAlbedo)
        throw Error(ErrorCode::InvalidArgument, "albedo objective needs an albedo problem");
    channels_ = diffuse ? 3 : 1;
    const int count = problem.size();
    basis_.resize(count);
    obs_.resize(count, channels_);
    for (int k = 0; k < count; ++k) {
        const Vec3& wi = problem.directions[k];
        basis_[k] = problem.radiance_scale *
                    (diffuse ? std::max(problem.normal.dot(wi), 0.0)
                             : ward_value(wi, problem.omega_o, problem.lobe, problem.frame));
        if (diffuse)
            for (int c = 0; c < 3; ++c) obs_(k, c) = problem.observations[k][c];
        else
            obs_(k, 0) = luminance(problem.observations[k]);
    }
}

void AlbedoObjective::residuals(const VecX& x, VecX& r, MatX* jacobian) const {
    const Eigen::Index count = obs_.rows();
    r.resize(count * channels_);
    if (jacobian) *jacobian = MatX::Zero(count * channels_, channels_);
    for (int c = 0; c < channels_; ++c)
        for (Eigen::Index k = 0; k < count; ++k) {
            r[c * count + k] = x[c] * basis_[k] - obs_(k, c);
            if (jacobian) (*jacobian)(c * count + k, c) = basis_[k];
        }
}

double AlbedoObjective::value(const VecX& x) const {
    VecX r;
    residuals(x, r, nullptr);
    return 0.5 * r.squaredNorm();
}

double AlbedoObjective::value_and_gradient(const VecX& x, VecX& gradient) const {
    gradient = VecX::Zero(channels_);
    double f = 0.0;
    for (int c = 0; c < channels_; ++c)
        for (Eigen::Index k = 0; k < obs_.rows(); ++k) {
            const double res = x[c] * basis_[k] - obs_(k, c);
            f += 0.5 * res * res;
            gradient[c] += res * basis_[k];
        }
    return f;
}

VecX AlbedoObjective::closed_form() const {
    VecX out = VecX::Zero(channels_);
    double bb = 0.0;
    for (double b : basis_) bb += b * b;
    if (!(bb > 0.0)) return out;
    for (int c = 0; c < channels_; ++c) {
        double bo = 0.0;
        for (Eigen::Index k = 0; k < obs_.rows(); ++k) bo += basis_[k] * obs_(k, c);
        out[c] = bo / bb;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Objective> make_objective(const PixelProblem& problem) {
    switch (problem.kind) {
        case ProblemKind::DiffuseNormal:
        case ProblemKind::SpecularNormal: return std::make_unique<NormalObjective>(problem, problem.normal);
        case ProblemKind::Sigma: return std::make_unique<SigmaObjective>(problem);
        case ProblemKind::DiffuseAlbedo:
        case ProblemKind::SpecularAlbedo: return std::make_unique<AlbedoObjective>(problem);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown problem kind");
}

VecX start_point(const PixelProblem& problem) {
    switch (problem.kind) {
        case ProblemKind::DiffuseNormal:
        case ProblemKind::SpecularNormal: return VecX::Zero(2);
        case ProblemKind::Sigma: return Eigen::Vector2d(std::log(problem.lobe.sigma_x), std::log(problem.lobe.sigma_y));
        case ProblemKind::DiffuseAlbedo: return VecX::Zero(3);
        case ProblemKind::SpecularAlbedo: return VecX::Zero(1);
    }
    return {};
}

}  // namespace polarmat
