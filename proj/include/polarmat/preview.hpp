// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "polarmat/pfm.hpp"

namespace polarmat {

enum class PreviewStyle {
    Scalar,  ///< false colour ramp over [lo, hi]
    Color,   ///< RGB scaled by 1 / hi
    Normal,  ///< (n + 1) / 2
};

/// 8-bit RGB raster, row-major top-to-bottom.
struct PreviewImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;
};

struct PreviewRange {
    double lo = 0.0;
    double hi = 1.0;
};

/// Scalar style uses the first channel of multi-channel images. Without an
/// explicit range, the finite min/max of the data is used (Scalar) or
/// [0, max] (Color).
PreviewImage make_preview(const PfmImage& image, PreviewStyle style, std::optional<PreviewRange> range = {});

void write_png(const std::filesystem::path& path, const PreviewImage& image);

}  // namespace polarmat
