// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "polarmat/image.hpp"

namespace polarmat {

/// Portable float map. Header "PF" (3 channels) or "Pf" (1 channel), then
/// "<width> <height>", then the scale; a negative scale marks little-endian
/// data. Pixel rows are stored bottom-to-top on disk. In memory `data` is
/// row-major top-to-bottom with interleaved channels.
struct PfmImage {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<float> data;

    float& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    float at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    bool operator==(const PfmImage&) const = default;
};

/// Writes little-endian PFM (scale -1). Throws CorruptImage for non-finite
/// values and IoError when the file cannot be written.
void write_pfm(const std::filesystem::path& path, const PfmImage& image);

/// Reads either byte order. Throws MissingFile, IoError, or CorruptImage
/// (bad header, or pixel data shorter than the header promises; the message
/// carries the byte offset).
PfmImage read_pfm(const std::filesystem::path& path);

/// Header-only read: {width, height, channels}.
struct PfmHeader {
    int width = 0;
    int height = 0;
    int channels = 0;
};
PfmHeader read_pfm_header(const std::filesystem::path& path);

// Map conversions. Values are rounded to float32.
PfmImage to_pfm(const ScalarMap& map);
PfmImage to_pfm(const RgbMap& map);
PfmImage to_pfm(const NormalMap& map);
ScalarMap scalar_map(const PfmImage& image);
RgbMap rgb_map(const PfmImage& image);
NormalMap normal_map(const PfmImage& image);

/// Frames of a stack laid out top to bottom in one W x (N H) image.
PfmImage stack_to_pfm(const ImageStack& stack);
ImageStack stack_from_pfm(const PfmImage& image, int count);

/// One frame of a stack as an H x W RGB image, and back.
PfmImage frame_to_pfm(const ImageStack& stack, int k);
void frame_from_pfm(ImageStack& stack, int k, const PfmImage& image);

}  // namespace polarmat
