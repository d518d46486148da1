// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/estimate.hpp"

#include "polarmat/parallel.hpp"

namespace polarmat {

namespace {

constexpr double kDegenerateNorm = 1e-9;

void check_length(std::span<const Rgb> signal, const LightRig& rig) {
    if (static_cast<int>(signal.size()) != rig.size())
        throw Error(ErrorCode::LengthMismatch, "signal has " + std::to_string(signal.size()) + " samples, rig has " +
                                                   std::to_string(rig.size()) + " lights");
}

Vec3 channel_vector(const GradientResponse& g, int c) { return {g[0][c], g[1][c], g[2][c]}; }

}  // namespace

Rgb init_diffuse_albedo(std::span<const Rgb> diffuse, const LightRig& rig) {
    check_length(diffuse, rig);
    Rgb sum = Rgb::Zero();
    for (const auto& s : diffuse) sum += s;
    return 4.0 * rig.kappa() / rig.size() * sum;
}

double init_specular_albedo(std::span<const Rgb> specular, const LightRig& rig) {
    check_length(specular, rig);
    double sum = 0.0;
    for (const auto& s : specular) sum += luminance(s);
    return 4.0 * kPi * rig.kappa() / rig.size() * sum;
}

InitialAlbedo init_albedo(const CleanStack& clean, const LightRig& rig, int threads) {
    const int h = clean.diffuse.height(), w = clean.diffuse.width();
    InitialAlbedo out{RgbMap(h, w, Rgb::Zero()), ScalarMap(h, w)};
    parallel_for(h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            out.rho_d(y, x) = init_diffuse_albedo(clean.diffuse.pixel(y, x), rig);
            out.rho_s(y, x) = init_specular_albedo(clean.specular.pixel(y, x), rig);
        }
    });
    return out;
}

std::optional<Direction3> init_diffuse_normal(const GradientResponse& gradient, const Rgb& rho_d) {
    static constexpr double weights[3] = {0.2126, 0.7152, 0.0722};
    Vec3 acc = Vec3::Zero();
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        if (!(rho_d[c] > 0.0)) continue;
        acc += weights[c] * 3.0 / (2.0 * kPi * rho_d[c]) * channel_vector(gradient, c);
        total += weights[c];
    }
    if (total == 0.0) return std::nullopt;
    acc /= total;
    if (!(acc.norm() >= kDegenerateNorm)) return std::nullopt;
    return acc.normalized();
}

std::optional<Direction3> init_specular_normal(const GradientResponse& gradient, const Direction3& omega_o) {
    const Vec3 g(luminance(gradient[0]), luminance(gradient[1]), luminance(gradient[2]));
    if (!(g.norm() >= kDegenerateNorm)) return std::nullopt;
    const Vec3 sum = g.normalized() + omega_o;
    if (!(sum.norm() >= kDegenerateNorm)) return std::nullopt;
    return sum.normalized();
}

InitialNormals init_normals(const GradientImages& gradients, const RgbMap& rho_d, const NormalMap& omega_o,
                            int threads) {
    const int h = gradients.diffuse.height(), w = gradients.diffuse.width();
    if (!gradients.specular.same_shape(h, w) || !rho_d.same_shape(h, w) || !omega_o.same_shape(h, w))
        throw Error(ErrorCode::DimensionMismatch, "normal initialization inputs differ in size");
    InitialNormals out{NormalMap(h, w, Vec3::Zero()), NormalMap(h, w, Vec3::Zero()), Grid<unsigned char>(h, w, 0)};
    parallel_for(h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            unsigned char flags = kFlagNone;
            if (const auto nd = init_diffuse_normal(gradients.diffuse(y, x), rho_d(y, x)))
                out.n_d(y, x) = *nd;
            else
                flags |= kFlagDegenerateDiffuse;
            if (const auto ns = init_specular_normal(gradients.specular(y, x), omega_o(y, x))) {
                out.n_s(y, x) = *ns;
                if (ns->dot(omega_o(y, x)) <= 0.0) flags |= kFlagBackFacing;
            } else {
                flags |= kFlagDegenerateSpecular;
            }
            out.flags(y, x) = flags;
        }
    });
    return out;
}

InitialEstimates initialize(const CleanStack& clean, const LightRig& rig, const NormalMap& omega_o, int threads) {
    auto albedo = init_albedo(clean, rig, threads);
    const auto gradients = synthesize_gradient_images(clean.diffuse, clean.specular, rig);
    auto normals = init_normals(gradients, albedo.rho_d, omega_o, threads);
    return {std::move(albedo.rho_d), std::move(albedo.rho_s), std::move(normals.n_d), std::move(normals.n_s),
            std::move(normals.flags)};
}

}  // namespace polarmat
