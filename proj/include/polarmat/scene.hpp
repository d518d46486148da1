// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "polarmat/synth.hpp"

namespace polarmat {

/// Synthetic capture description used by the `synth` command and the tests.
struct SceneConfig {
    std::string preset = "mixed";  ///< mixed, lambertian, isotropic, anisotropic
    int height = 64;
    int width = 64;
    int lights = 346;
    double max_tilt_degrees = 25.0;  ///< dome slope at the image corners
    double focal_factor = 4.0;       ///< focal length in units of the image width
};

struct SyntheticScene {
    GroundTruthMaterial material;
    LightRig rig;
    CameraPose pose;
};

std::vector<std::string> scene_presets();

/// Gentle dome seen from above. The `mixed` preset splits the image into
/// vertical thirds: Lambertian, isotropic Ward (sigma 0.1) and anisotropic
/// Ward (0.05, 0.3), with rho_s = 0.4 on the glossy thirds. Diffuse albedo
/// varies smoothly across the image.
SyntheticScene make_scene(const SceneConfig& config);

/// Renders the scene with the configured artifacts.
PolarizedOLATStack render_scene(const SyntheticScene& scene, const ArtifactConfig& artifacts, std::uint64_t seed,
                                int threads = 1);

}  // namespace polarmat
