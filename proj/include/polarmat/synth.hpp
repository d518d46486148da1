// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "polarmat/core.hpp"
#include "polarmat/image.hpp"
#include "polarmat/ward.hpp"

namespace polarmat {

/// Raw polarized OLAT capture of one camera.
struct PolarizedOLATStack {
    ImageStack cross;
    ImageStack parallel;
    LightRig rig;
    CameraPose pose;
    /// When set, every pixel is seen along this direction instead of the
    /// per-pixel rays of `pose`.
    std::optional<Direction3> fixed_view;
    /// Average ambient map in raw capture units; empty when not measured.
    RgbMap ambient;

    int count() const { return cross.count(); }
    int height() const { return cross.height(); }
    int width() const { return cross.width(); }

    /// Surface-to-camera direction for every pixel.
    NormalMap view_directions() const;

    /// Throws DimensionMismatch when stacks, rig and ambient disagree.
    void validate() const;

    /// Number of samples where parallel < cross - noise_floor.
    std::size_t polarization_violations(double noise_floor) const;
};

/// Per-pixel ground-truth reflectance used by the forward renderer.
struct GroundTruthMaterial {
    RgbMap rho_d;
    ScalarMap rho_s;
    NormalMap n_d;
    NormalMap n_s;
    Grid<WardLobe> lobe;
    /// Optional explicit shading frames; derived from n_s with
    /// shading_frame() when empty.
    Grid<ShadingFrame> frame;
    /// Optional occluder: a light k is blocked at a pixel when the pixel's
    /// occluder axis a is non-zero and omega_k . a > 0. Empty means no
    /// occlusion anywhere.
    NormalMap occluder;

    int height() const { return rho_d.height(); }
    int width() const { return rho_d.width(); }

    ShadingFrame frame_at(int y, int x) const;
    bool visible(int y, int x, const Vec3& omega_i) const;

    void validate() const;

    /// Every pixel gets the same parameters.
    static GroundTruthMaterial uniform(int height, int width, const Rgb& rho_d, double rho_s, const Vec3& normal,
                                       const WardLobe& lobe);
};

/// Below-horizon energy added to one (pixel, light) sample of the separated
/// sequences, standing in for inter-reflection from the surroundings.
struct BelowHorizonInjection {
    int y = 0;
    int x = 0;
    int light = 0;
    Rgb diffuse = Rgb::Zero();
    Rgb specular = Rgb::Zero();
};

struct ArtifactConfig {
    /// Chance that a (pixel, light) sample of each capture receives a spike.
    double overexposure_probability = 0.0;
    double overexposure_magnitude = 0.0;
    bool lens_flare_enabled = false;
    /// Flare added to lights facing the camera, scaled by -omega_i . omega_o.
    double lens_flare_strength = 0.05;
    double ambient_level = 0.0;
    double sensor_noise_stddev = 0.0;
    std::vector<BelowHorizonInjection> interreflection;

    void validate() const;
};

/// Forward model. Per light k and pixel:
///   diffuse  = rho_d L0 A0 max(omega_k . n_d, 0) nu
///   specular = rho_s L0 A0 f_sigma(omega_k, omega_o) nu
///   cross    = diffuse / 2 + ambient
///   parallel = diffuse / 2 + specular / 2 + ambient
/// followed by artifact injection. Randomness is seeded per pixel from
/// (seed, y, x), so the result does not depend on evaluation order.
///
/// Spikes: a cross-capture spike adds the magnitude to both captures (an
/// unpolarized glare, so it lands in the diffuse sequence only); a
/// parallel-capture spike adds it to the parallel capture (specular only).
PolarizedOLATStack render_olat(const GroundTruthMaterial& material, const LightRig& rig, const CameraPose& pose,
                               const ArtifactConfig& artifacts, std::uint64_t seed, int threads = 1);

/// Same, with a single view direction for every pixel.
PolarizedOLATStack render_olat(const GroundTruthMaterial& material, const LightRig& rig, const Direction3& omega_o,
                               const ArtifactConfig& artifacts, std::uint64_t seed, int threads = 1);

/// Responses to the three spherical gradient patterns, synthesized as
/// sum_k w_j^k I^k with w_j^k the j-th Cartesian component of omega_k.
/// Indexed by axis (x, y, z); each entry is per channel.
using GradientResponse = std::array<Rgb, 3>;

GradientResponse gradient_response(std::span<const Rgb> signal, const LightRig& rig);

struct GradientImages {
    Grid<GradientResponse> diffuse;
    Grid<GradientResponse> specular;
};

GradientImages synthesize_gradient_images(const ImageStack& diffuse, const ImageStack& specular, const LightRig& rig);

/// Separates the raw captures first, then synthesizes the gradients.
GradientImages synthesize_gradient_images(const PolarizedOLATStack& stack);

}  // namespace polarmat
