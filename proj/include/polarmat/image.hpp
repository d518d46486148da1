// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "polarmat/core.hpp"

namespace polarmat {

template <class T>
T zero_value() {
    if constexpr (requires { T::Zero(); })
        return T::Zero();
    else
        return T{};
}

/// Row-major H x W grid of per-pixel values. Eigen element types are
/// zero-filled by default.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, const T& fill = zero_value<T>())
        : height_(height), width_(width), data_(static_cast<std::size_t>(height) * width, fill) {}

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int y, int x) { return data_[index(y, x)]; }
    const T& operator()(int y, int x) const { return data_[index(y, x)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    bool same_shape(int height, int width) const { return height_ == height && width_ == width; }

private:
    std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width_ + x; }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using ScalarMap = Grid<double>;
using RgbMap = Grid<Rgb>;
using NormalMap = Grid<Vec3>;

/// N x H x W x 3 stack of float32 RGB frames. Float storage matches the PFM
/// on-disk format, so in-memory and file-backed pipelines see identical data.
class ImageStack {
public:
    ImageStack() = default;
    ImageStack(int count, int height, int width)
        : count_(count), height_(height), width_(width),
          data_(static_cast<std::size_t>(count) * height * width * 3, 0.0f) {}

    int count() const { return count_; }
    int height() const { return height_; }
    int width() const { return width_; }
    bool empty() const { return data_.empty(); }

    bool same_shape(const ImageStack& o) const {
        return count_ == o.count_ && height_ == o.height_ && width_ == o.width_;
    }

    float& at(int k, int y, int x, int c) { return data_[offset(k, y, x) + c]; }
    float at(int k, int y, int x, int c) const { return data_[offset(k, y, x) + c]; }

    Rgb sample(int k, int y, int x) const {
        const float* p = &data_[offset(k, y, x)];
        return {p[0], p[1], p[2]};
    }
    void set_sample(int k, int y, int x, const Rgb& v) {
        float* p = &data_[offset(k, y, x)];
        p[0] = static_cast<float>(v[0]);
        p[1] = static_cast<float>(v[1]);
        p[2] = static_cast<float>(v[2]);
    }

    /// Gathers the time-domain signal of one pixel.
    PixelSignal pixel(int y, int x) const {
        PixelSignal s(count_);
        for (int k = 0; k < count_; ++k) s[k] = sample(k, y, x);
        return s;
    }
    void set_pixel(int y, int x, const PixelSignal& s) {
        for (int k = 0; k < count_; ++k) set_sample(k, y, x, s[k]);
    }

    /// Pointer to frame `k` (H x W x 3 floats, row-major).
    float* frame(int k) { return &data_[offset(k, 0, 0)]; }
    const float* frame(int k) const { return &data_[offset(k, 0, 0)]; }

    const std::vector<float>& values() const { return data_; }
    std::vector<float>& values() { return data_; }

    bool operator==(const ImageStack&) const = default;

private:
    std::size_t offset(int k, int y, int x) const {
        return ((static_cast<std::size_t>(k) * height_ + y) * width_ + x) * 3;
    }

    int count_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Per-pixel, per-light boolean mask (H x W x N).
class LightMask {
public:
    LightMask() = default;
    LightMask(int height, int width, int count)
        : height_(height), width_(width), count_(count),
          bits_(static_cast<std::size_t>(height) * width * count, 0) {}

    int height() const { return height_; }
    int width() const { return width_; }
    int count() const { return count_; }

    bool get(int y, int x, int k) const { return bits_[offset(y, x) + k] != 0; }
    void set(int y, int x, int k, bool v) { bits_[offset(y, x) + k] = v ? 1 : 0; }

    const std::vector<unsigned char>& values() const { return bits_; }

private:
    std::size_t offset(int y, int x) const {
        return (static_cast<std::size_t>(y) * width_ + x) * count_;
    }

    int height_ = 0;
    int width_ = 0;
    int count_ = 0;
    std::vector<unsigned char> bits_;
};

}  // namespace polarmat
