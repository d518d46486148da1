// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/scene.hpp"

#include <algorithm>

namespace polarmat {

std::vector<std::string> scene_presets() { return {"mixed", "lambertian", "isotropic", "anisotropic"}; }

namespace {

enum class Region { Lambertian, Isotropic, Anisotropic };

Region region_at(const std::string& preset, int x, int width) {
    if (preset == "lambertian") return Region::Lambertian;
    if (preset == "isotropic") return Region::Isotropic;
    if (preset == "anisotropic") return Region::Anisotropic;
    const int third = 3 * x / width;
    return third == 0 ? Region::Lambertian : third == 1 ? Region::Isotropic : Region::Anisotropic;
}

}  // namespace

SyntheticScene make_scene(const SceneConfig& config) {
    const auto presets = scene_presets();
    if (std::find(presets.begin(), presets.end(), config.preset) == presets.end())
        throw Error(ErrorCode::InvalidArgument, "unknown scene preset '" + config.preset + "'");
    if (config.height < 1 || config.width < 1)
        throw Error(ErrorCode::InvalidArgument, "scene needs a positive image size");
    if (!(config.max_tilt_degrees >= 0.0 && config.max_tilt_degrees < 80.0) || !(config.focal_factor > 0.0))
        throw Error(ErrorCode::InvalidArgument, "scene tilt must lie in [0, 80) degrees and focal factor be positive");

    const int h = config.height, w = config.width;
    SyntheticScene scene;
    scene.rig = LightRig::spiral(config.lights);
    scene.pose = CameraPose::looking_down(h, w, config.focal_factor * w);

    auto& m = scene.material;
    m.rho_d = RgbMap(h, w);
    m.rho_s = ScalarMap(h, w);
    m.n_d = NormalMap(h, w);
    m.n_s = NormalMap(h, w);
    m.lobe = Grid<WardLobe>(h, w);
    const double slope = std::tan(config.max_tilt_degrees * kPi / 180.0) / std::sqrt(2.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w, v = (y + 0.5) / h;
            const Vec3 n = Vec3(slope * (2.0 * u - 1.0), slope * (2.0 * v - 1.0), 1.0).normalized();
            m.n_d(y, x) = n;
            m.n_s(y, x) = n;
            m.rho_d(y, x) = Rgb(0.3 + 0.5 * u, 0.2 + 0.4 * v, 0.15 + 0.3 * (1.0 - u));
            switch (region_at(config.preset, x, w)) {
                case Region::Lambertian:
                    m.rho_s(y, x) = 0.0;
                    m.lobe(y, x) = {0.1, 0.1};
                    break;
                case Region::Isotropic:
                    m.rho_s(y, x) = 0.4;
                    m.lobe(y, x) = {0.1, 0.1};
                    break;
                case Region::Anisotropic:
                    m.rho_s(y, x) = 0.4;
                    m.lobe(y, x) = {0.05, 0.3};
                    break;
            }
        }
    }
    return scene;
}

PolarizedOLATStack render_scene(const SyntheticScene& scene, const ArtifactConfig& artifacts, std::uint64_t seed,
                                int threads) {
    return render_olat(scene.material, scene.rig, scene.pose, artifacts, seed, threads);
}

}  // namespace polarmat
