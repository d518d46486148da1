// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polarmat/manifest.hpp"
#include "polarmat/pipeline.hpp"

namespace polarmat {

/// Metadata of one bundle file, as listed in bundle.json.
struct MapInfo {
    std::string name;
    std::string file;
    int width = 0;  ///< on-disk PFM size
    int height = 0;
    int channels = 1;
    std::optional<double> lo;  ///< declared value range; unbounded when empty
    std::optional<double> hi;
    bool unit_norm = false;  ///< every pixel is a unit vector or exactly zero
    std::string layout;      ///< "map", "stack" (N frames stacked vertically) or "mask" (N columns, H*W rows)
};

/// A bundle directory holds bundle.json (map index with sizes and value
/// ranges), provenance.json, the maps as PFM, and diagnostics.csv once the
/// optimize stage has run. Only the maps of completed stages are written;
/// stale maps from a previous, longer run are removed.
void write_bundle(const std::filesystem::path& dir, const MaterialBundle& bundle);

/// Reads a bundle written by write_bundle. The returned config holds the
/// recorded overexposure parameters and default solvers.
MaterialBundle read_bundle(const std::filesystem::path& dir);

/// Index of the maps in a bundle directory.
std::vector<MapInfo> read_bundle_index(const std::filesystem::path& dir);

/// Checks every map against its declared range. Returns one message per
/// violated map; empty when the bundle is consistent.
std::vector<std::string> check_bundle(const std::filesystem::path& dir, double unit_tolerance = 1e-5);

/// Pipeline parameters recorded in the manifest.
PipelineConfig pipeline_config(const CaptureManifest& manifest);

/// FNV-1a of the canonical manifest serialization.
std::string manifest_hash(const CaptureManifest& manifest);

/// Reads the capture, runs the stages up to `last` and writes the bundle to
/// `out_dir`.
MaterialBundle run_pipeline(const CaptureManifest& manifest, const PipelineConfig& config, Stage last,
                            const std::filesystem::path& out_dir);
MaterialBundle run_pipeline(const std::filesystem::path& manifest_path, Stage last,
                            const std::filesystem::path& out_dir);

/// Continues the bundle dumped in `in_dir` up to `last` and writes the result
/// to `out_dir` (which may equal `in_dir`).
MaterialBundle continue_pipeline(const CaptureManifest& manifest, const PipelineConfig& config,
                                 const std::filesystem::path& in_dir, Stage last,
                                 const std::filesystem::path& out_dir);

}  // namespace polarmat
