// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/preview.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

namespace polarmat {

namespace {

// Perceptual dark-blue to yellow ramp, sampled at five stops.
constexpr std::array<std::array<double, 3>, 5> kRamp = {{
    {0.267, 0.005, 0.329},
    {0.229, 0.322, 0.546},
    {0.128, 0.567, 0.551},
    {0.369, 0.789, 0.383},
    {0.993, 0.906, 0.144},
}};

std::array<double, 3> ramp(double t) {
    t = std::clamp(t, 0.0, 1.0) * (kRamp.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kRamp.size() - 2);
    const double f = t - i;
    return {kRamp[i][0] + f * (kRamp[i + 1][0] - kRamp[i][0]), kRamp[i][1] + f * (kRamp[i + 1][1] - kRamp[i][1]),
            kRamp[i][2] + f * (kRamp[i + 1][2] - kRamp[i][2])};
}

std::uint8_t to_byte(double v) {
    if (!std::isfinite(v)) return 0;
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

PreviewImage make_preview(const PfmImage& img, PreviewStyle style, std::optional<PreviewRange> range) {
    PreviewImage out{img.width, img.height, std::vector<std::uint8_t>(static_cast<std::size_t>(img.width) * img.height * 3)};
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if ((style == PreviewStyle::Color || style == PreviewStyle::Normal) && img.channels != 3)
        throw Error(ErrorCode::DimensionMismatch, "colour previews need a 3-channel image");

    if (!range) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < (style == PreviewStyle::Scalar ? 1 : img.channels); ++c) {
                const double v = img.data[i * img.channels + c];
                if (!std::isfinite(v)) continue;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        if (!(lo <= hi)) lo = hi = 0.0;
        range = style == PreviewStyle::Scalar ? PreviewRange{lo, hi} : PreviewRange{0.0, std::max(hi, 0.0)};
    }
    const double span = range->hi - range->lo;

    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* px = &out.rgb[i * 3];
        const float* v = &img.data[i * img.channels];
        switch (style) {
            case PreviewStyle::Scalar: {
                const auto c = ramp(span > 0.0 ? (v[0] - range->lo) / span : 0.5);
                for (int k = 0; k < 3; ++k) px[k] = to_byte(c[k]);
                break;
            }
            case PreviewStyle::Color:
                for (int k = 0; k < 3; ++k) px[k] = to_byte(range->hi > 0.0 ? v[k] / range->hi : 0.0);
                break;
            case PreviewStyle::Normal:
                for (int k = 0; k < 3; ++k) px[k] = to_byte(0.5 * (v[k] + 1.0));
                break;
        }
    }
    return out;
}

void write_png(const std::filesystem::path& path, const PreviewImage& img) {
    if (img.width <= 0 || img.height <= 0 || img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3)
        throw Error(ErrorCode::DimensionMismatch, "preview buffer does not match its size");
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorCode::IoError, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(&img.rgb[static_cast<std::size_t>(y) * img.width * 3]));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace polarmat
