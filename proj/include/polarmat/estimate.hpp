// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "polarmat/core.hpp"
#include "polarmat/image.hpp"
#include "polarmat/preprocess.hpp"
#include "polarmat/synth.hpp"

namespace polarmat {

/// (4 kappa / N) sum_k I_d^k, per channel.
Rgb init_diffuse_albedo(std::span<const Rgb> diffuse, const LightRig& rig);

/// (4 pi kappa / N) sum_k lum(I_s^k).
double init_specular_albedo(std::span<const Rgb> specular, const LightRig& rig);

struct InitialAlbedo {
    RgbMap rho_d;
    ScalarMap rho_s;
};

InitialAlbedo init_albedo(const CleanStack& clean, const LightRig& rig, int threads = 1);

/// Diffuse normal from gradient responses: each channel's vector is scaled by
/// 3 / (2 pi rho_d[c]), the three are averaged with luminance weights and the
/// result normalized. Empty when no channel has positive albedo or the
/// gradient is shorter than 1e-9.
std::optional<Direction3> init_diffuse_normal(const GradientResponse& gradient, const Rgb& rho_d);

/// normalize(normalize(g) + omega_o) with g the luminance of the specular
/// gradient response. Empty for degenerate gradients.
std::optional<Direction3> init_specular_normal(const GradientResponse& gradient, const Direction3& omega_o);

/// Per-pixel status bits of the initial estimates.
enum PixelFlag : unsigned char {
    kFlagNone = 0,
    kFlagDegenerateDiffuse = 1,
    kFlagDegenerateSpecular = 2,
    kFlagBackFacing = 4,  ///< n_s . omega_o <= 0, skipped by specular fits
    kFlagUnderdetermined = 8,  ///< some refinement had fewer than 3 samples
    kFlagNotConverged = 16,    ///< some refinement stopped before convergence
    kFlagClamped = 32,         ///< a negative albedo estimate was clamped
};

struct InitialEstimates {
    RgbMap rho_d;
    ScalarMap rho_s;
    NormalMap n_d;  ///< zero vector where flagged degenerate
    NormalMap n_s;
    Grid<unsigned char> flags;

    int height() const { return rho_d.height(); }
    int width() const { return rho_d.width(); }
};

struct InitialNormals {
    NormalMap n_d;
    NormalMap n_s;
    Grid<unsigned char> flags;
};

InitialNormals init_normals(const GradientImages& gradients, const RgbMap& rho_d, const NormalMap& omega_o,
                            int threads = 1);

/// Albedos, gradient images and normals in one call.
InitialEstimates initialize(const CleanStack& clean, const LightRig& rig, const NormalMap& omega_o, int threads = 1);

}  // namespace polarmat
