// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polarmat/optimize.hpp"
#include "polarmat/preprocess.hpp"
#include "polarmat/synth.hpp"

namespace polarmat {

inline constexpr int kManifestVersion = 1;

/// Capture description. Serialized as JSON; file paths are relative to the
/// manifest's directory.
///
///   {
///     "version": 1,
///     "count": 346, "height": 64, "width": 64,
///     "lights": {"generator": "fibonacci-spiral"},   // or {"directions": [[x, y, z], ...]}
///     "l0": 1.0, "a0": 0.0363,                       // a0 defaults to 4 pi / count
///     "files": {"cross": ["cross/0000.pfm", ...], "parallel": [...]},
///     "camera": {"rotation": [[...]], "translation": [...], "intrinsics": [[...]]},
///     "view_direction": [0, 0, 1],                   // instead of "camera"
///     "ambient": "ambient.pfm",                      // optional, raw capture units
///     "overexposure": {"epsilon": 1.0, "iterations": 2},
///     "solvers": {"sigma": {"backend": "gauss-newton", "max_iterations": 500,
///                           "gradient_tolerance": 1e-10, "history": 10,
///                           "line_search": {"c1": 1e-4, "c2": 0.9, "decrease_factor": 0.8,
///                                           "max_steps": 30, "max_step_length": 1.0}}, ...}
///   }
struct CaptureManifest {
    int version = kManifestVersion;
    int count = 0;
    int height = 0;
    int width = 0;
    LightRig rig;
    std::vector<std::string> cross_files;
    std::vector<std::string> parallel_files;
    std::optional<CameraPose> pose;
    std::optional<Direction3> view_direction;
    std::string ambient_file;  ///< empty when no ambient map was measured
    OverexposureConfig overexposure;
    SolverSet solvers = SolverSet::defaults();

    /// Directory the relative paths resolve against. Not serialized.
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::string& file) const { return base_dir / file; }
};

/// Field-wise equality, ignoring base_dir.
bool same_manifest(const CaptureManifest& a, const CaptureManifest& b);

/// Parses JSON text. Checks the schema, version and internal consistency but
/// not the referenced files.
CaptureManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});

std::string dump_manifest(const CaptureManifest& manifest);

/// Checks that every referenced file exists and matches the declared size.
/// Throws MissingFile naming the first missing light index, or
/// DimensionMismatch.
void validate_files(const CaptureManifest& manifest);

/// parse_manifest + validate_files.
CaptureManifest read_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const CaptureManifest& manifest);

/// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string manifest_hash(const std::filesystem::path& path);

/// Reads the capture images listed in the manifest.
PolarizedOLATStack read_stack(const CaptureManifest& manifest);

/// Writes the capture images to the manifest's paths, creating directories
/// as needed.
void write_stack(const CaptureManifest& manifest, const PolarizedOLATStack& stack);

/// Manifest for `stack` with the default layout (cross/NNNN.pfm,
/// parallel/NNNN.pfm, ambient.pfm) rooted at `dir`.
CaptureManifest default_manifest(const PolarizedOLATStack& stack, const std::filesystem::path& dir);

/// Writes images and manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_capture(const std::filesystem::path& dir, const PolarizedOLATStack& stack,
                                    const OverexposureConfig& overexposure = {},
                                    const SolverSet& solvers = SolverSet::defaults());

}  // namespace polarmat
