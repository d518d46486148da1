// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polarmat/estimate.hpp"
#include "polarmat/optimize.hpp"
#include "polarmat/preprocess.hpp"
#include "polarmat/synth.hpp"

namespace polarmat {

enum class Stage { Separate = 0, Preprocess = 1, Init = 2, Optimize = 3 };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view name);

/// Parses a comma-separated stage list ("separate,preprocess", "all"). Stages
/// depend on their predecessors, so the result is the last stage requested;
/// every stage before it runs as well.
Stage parse_stage_list(std::string_view list);

struct PipelineConfig {
    OverexposureConfig overexposure;
    SolverSet solvers = SolverSet::defaults();
    int threads = 1;
    double shadow_floor = 0.05;
    WardLobe sigma_init{0.2, 0.2};
    /// Apply the ambient visibility gate to the specular-normal samples.
    /// Disabling it keeps every sample in front of the start normal.
    bool specular_normal_gate = true;

    void validate() const;
};

/// Output of the optimize stage.
struct RefinedMaterial {
    NormalMap n_d;
    NormalMap n_s;
    NormalMap normal;  ///< fused
    ScalarMap correlation_d;
    ScalarMap correlation_s;
    Grid<WardLobe> sigma;  ///< zero where no lobe was fitted
    ScalarMap anisotropy;
    ScalarMap roughness;
    RgbMap rho_d;
    ScalarMap rho_s;
    RgbMap rho_d_unshadowed;     ///< rho_d / max(tau_d, floor)
    ScalarMap rho_s_unshadowed;  ///< rho_s / max(tau_s, floor)
};

struct Provenance {
    std::string tool_version = POLARMAT_VERSION;
    std::string manifest_hash;  ///< FNV-1a 64 of the manifest bytes, hex
};

/// Everything a pipeline run produced, up to `last_stage`.
struct MaterialBundle {
    Stage last_stage = Stage::Separate;
    int count = 0;
    int height = 0;
    int width = 0;

    /// Separated sequences after `separate`, cleaned ones afterwards.
    CleanStack sequences;
    std::optional<AmbientMaps> ambient;
    std::optional<GeometryMaps> geometry;
    std::optional<InitialEstimates> init;
    std::optional<RefinedMaterial> refined;
    Grid<unsigned char> flags;
    std::vector<DiagnosticRow> diagnostics;

    PipelineConfig config;
    Provenance provenance;

    bool has(Stage s) const { return static_cast<int>(s) <= static_cast<int>(last_stage); }
};

/// In-memory pipeline: runs separate, preprocess, init and optimize in order,
/// stopping after `last`. Stage results are rounded to float32 at every
/// stage boundary, the precision of the on-disk dumps, so a run split across
/// invocations matches a single run bit for bit. Errors are re-thrown with
/// the failing stage named.
MaterialBundle process(const PolarizedOLATStack& capture, const PipelineConfig& config, Stage last = Stage::Optimize);

/// Continues a partial bundle up to `last` with the capture's rig, views and
/// measured ambient.
void resume(MaterialBundle& bundle, const PolarizedOLATStack& capture, Stage last);

/// Continues from a bundle without the raw capture.
void resume(MaterialBundle& bundle, const LightRig& rig, const NormalMap& views, const RgbMap& measured_ambient,
            Stage last);

}  // namespace polarmat
