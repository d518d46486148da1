// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "polarmat/core.hpp"
#include "polarmat/image.hpp"
#include "polarmat/synth.hpp"

namespace polarmat {

/// Diffuse and specular sequences of a whole capture.
struct SeparatedStack {
    ImageStack diffuse;
    ImageStack specular;
};

SeparatedStack separate_stack(const PolarizedOLATStack& stack, int threads = 1);

// ---------------------------------------------------------------------------
// Overexposure removal

struct OverexposureConfig {
    double epsilon = 1.0;
    int iterations = 2;
};

struct OverexposureResult {
    PixelSignal signal;
    std::vector<std::array<bool, 3>> removed;

    std::size_t removed_count() const;
};

/// Replacement level for one channel: mean of the samples left after
/// dropping the brightest 1% (at least one sample when n > 1), capped at
/// epsilon / 10 so it stays well below the detection threshold.
double overexposure_delta(std::span<const double> channel, double epsilon);

/// Sorted-gap spike removal, run independently on each channel for
/// `iterations` passes. Each pass sorts the channel in descending order,
/// finds the first consecutive gap larger than epsilon and replaces the
/// sample just above that gap with the value just below it plus delta. At
/// most one sample per channel changes per pass. `delta` overrides the
/// automatic replacement level.
OverexposureResult remove_overexposure(std::span<const Rgb> signal, double epsilon, int iterations,
                                       std::optional<double> delta = std::nullopt);

/// Output of the cleaning stage. `removed_*` use the same flat indexing as
/// ImageStack::values() and mark samples changed by overexposure removal.
struct CleanStack {
    ImageStack diffuse;
    ImageStack specular;
    std::vector<unsigned char> removed_diffuse;
    std::vector<unsigned char> removed_specular;

    std::size_t removed_count() const;
};

CleanStack clean_stack(const SeparatedStack& separated, const OverexposureConfig& config, int threads = 1);

// ---------------------------------------------------------------------------
// Ambient level, visibility, inter-reflection, occlusion

/// Per-channel mean of the darkest 5% of samples (ranked by luminance, at
/// least one sample).
Rgb ambient_estimate(std::span<const Rgb> signal);

RgbMap ambient_map(const ImageStack& sequence, int threads = 1);

/// Ambient gates for the diffuse and specular sequences.
struct AmbientMaps {
    RgbMap diffuse;
    RgbMap specular;
};

/// Gates used downstream. A measured raw-capture ambient map maps to 2 zeta
/// for the diffuse sequence (which is 2 I_cross); the specular sequence is a
/// difference in which ambient cancels, so its gate always comes from the
/// darkest samples of that sequence. Without a measured map both gates use
/// ambient_map().
AmbientMaps ambient_gates(const CleanStack& clean, const RgbMap& measured_ambient, int threads = 1);

/// The gating indicator: 1 when any channel exceeds the ambient level.
inline bool above_ambient(const Rgb& sample, const Rgb& zeta) { return (sample > zeta).any(); }

/// nu_k = [any channel of I_k > zeta] and n . omega_k > 0.
std::vector<bool> visibility(std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig, const Vec3& normal);

/// sum_k [I_k > zeta] max(-omega_k . n, 0) I_k, per channel.
Rgb interreflection(std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig, const Vec3& normal);

/// (4 / N) sum_k [I_k > zeta] max(omega_k . n, 0).
double occlusion(std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig, const Vec3& normal);

struct SurfaceNormals {
    NormalMap diffuse;
    NormalMap specular;
};

struct InterreflectionMaps {
    RgbMap diffuse;
    ScalarMap specular;  ///< luminance of the specular inter-reflection
};

InterreflectionMaps interreflection_map(const CleanStack& clean, const SurfaceNormals& normals,
                                        const AmbientMaps& zeta, const LightRig& rig, int threads = 1);

struct OcclusionMaps {
    ScalarMap diffuse;
    ScalarMap specular;
};

OcclusionMaps occlusion_map(const CleanStack& clean, const SurfaceNormals& normals, const AmbientMaps& zeta,
                            const LightRig& rig, int threads = 1);

struct GeometryMaps {
    LightMask visibility_d;
    LightMask visibility_s;
    ScalarMap tau_d;
    ScalarMap tau_s;
    RgbMap interreflection_d;
    ScalarMap interreflection_s;
};

/// Visibility, occlusion and inter-reflection in one pass. Pixels whose
/// normal is the zero vector (undefined) get empty visibility and zero maps.
GeometryMaps compute_geometry(const CleanStack& clean, const SurfaceNormals& normals, const AmbientMaps& zeta,
                              const LightRig& rig, int threads = 1);

/// rho / max(tau, floor).
ScalarMap shadow_compensate(const ScalarMap& albedo, const ScalarMap& tau, double floor);
RgbMap shadow_compensate(const RgbMap& albedo, const ScalarMap& tau, double floor);

}  // namespace polarmat
