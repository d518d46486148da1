// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "polarmat/error.hpp"

namespace polarmat {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Rgb = Eigen::Array3d;

/// Unit vector on the sphere. Directions are plain Vec3 values whose norm is
/// kept at 1 by every operation that produces them.
using Direction3 = Vec3;

inline constexpr double kPi = std::numbers::pi;

/// Rec. 709 luminance weights, used wherever an RGB sample has to be reduced
/// to a single intensity.
inline double luminance(const Rgb& c) {
    return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
}

/// Normalizes `v`; throws DegenerateVector when its norm is below `eps`.
Direction3 normalized(const Vec3& v, double eps = 1e-300);

/// Angle between two directions in degrees, robust near 0 and 180.
double angle_degrees(const Vec3& a, const Vec3& b);

// ---------------------------------------------------------------------------
// Polarization

/// Intensity transmitted through an analyzer at angle `theta` to the
/// polarization axis of fully polarized light of intensity `i0`.
double malus_intensity(double i0, double theta);

struct StokesVector {
    Eigen::Vector4d s = Eigen::Vector4d::Zero();

    static StokesVector unpolarized(double intensity) {
        return {Eigen::Vector4d(intensity, 0.0, 0.0, 0.0)};
    }

    double intensity() const { return s[0]; }

    /// s0 >= 0 and s1^2 + s2^2 + s3^2 <= s0^2 within `tol`.
    bool is_physical(double tol = 1e-12) const;
};

struct MuellerMatrix {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();

    StokesVector operator*(const StokesVector& in) const { return {m * in.s}; }
    MuellerMatrix operator*(const MuellerMatrix& rhs) const { return {m * rhs.m}; }
};

/// Ideal linear polarizer with transmission axis at `theta` radians from the
/// reference axis. Keeps the physical 1/2 factor, so unpolarized light loses
/// half its intensity.
MuellerMatrix polarizer_mueller(double theta);

// ---------------------------------------------------------------------------
// Per-pixel signals

/// One pixel's length-N RGB intensity sequence.
using PixelSignal = std::vector<Rgb>;

struct SeparatedSignal {
    PixelSignal diffuse;
    PixelSignal specular;
};

/// Splits cross/parallel polarized sequences into diffuse (2 I_cross) and
/// specular (2 I_parallel - 2 I_cross, clamped at zero) components.
SeparatedSignal separate(std::span<const Rgb> cross, std::span<const Rgb> parallel);

/// Throws InvalidSignal unless every component is finite and non-negative.
void validate_signal(std::span<const Rgb> signal);

// ---------------------------------------------------------------------------
// Light rig

/// `n` directions on a golden-angle Fibonacci spiral, z strictly decreasing
/// from near +z to near -z.
std::vector<Direction3> spiral_directions(int n);

struct LightRig {
    std::vector<Direction3> directions;
    double l0 = 1.0;  ///< radiant intensity of every light
    double a0 = 0.0;  ///< solid angle covered by one light (sr)
    std::string generator;  ///< "fibonacci-spiral" or empty for explicit lists

    int size() const { return static_cast<int>(directions.size()); }
    double kappa() const { return 1.0 / (l0 * a0); }

    /// Spiral rig whose lights evenly partition the sphere: a0 = 4 pi / n.
    static LightRig spiral(int n, double l0 = 1.0);

    /// Checks count, unit norms, distinctness, kappa and octant coverage.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Camera

/// Pinhole camera, world-to-camera X_c = R X_w + t, OpenCV axes (x right,
/// y down, z forward).
struct CameraPose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    Mat3 intrinsics = Mat3::Identity();

    void validate() const;

    /// Unit direction from the surface seen at pixel centre (x, y) towards
    /// the camera.
    Direction3 view_direction(double x, double y) const;

    /// Camera above the object looking down -z with focal length `focal`
    /// pixels and principal point at the image centre.
    static CameraPose looking_down(int height, int width, double focal);
};

}  // namespace polarmat
