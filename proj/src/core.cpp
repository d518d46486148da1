// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/core.hpp"

#include <algorithm>

namespace polarmat {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::InvalidCount: return "InvalidCount";
        case ErrorCode::InvalidSignal: return "InvalidSignal";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateVector: return "DegenerateVector";
        case ErrorCode::BelowHorizon: return "BelowHorizon";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptySignal: return "EmptySignal";
        case ErrorCode::UnsupportedBackend: return "UnsupportedBackend";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::CorruptImage: return "CorruptImage";
    }
    return "Unknown";
}

Error Error::with_context(std::string_view context) const {
    const std::string prefix = std::string(to_string(code_)) + ": ";
    std::string rest = what();
    if (rest.rfind(prefix, 0) == 0) rest.erase(0, prefix.size());
    return Error(code_, prefix + std::string(context) + ": " + rest, Verbatim{});
}

Direction3 normalized(const Vec3& v, double eps) {
    const double len = v.norm();
    if (!(len > eps) || !std::isfinite(len))
        throw Error(ErrorCode::DegenerateVector, "cannot normalize vector of length " + std::to_string(len));
    return v / len;
}

double angle_degrees(const Vec3& a, const Vec3& b) {
    // atan2 form stays accurate for nearly parallel vectors.
    return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / kPi;
}

double malus_intensity(double i0, double theta) {
    const double c = std::cos(theta);
    return i0 * c * c;
}

bool StokesVector::is_physical(double tol) const {
    return s[0] >= -tol && s.tail<3>().squaredNorm() <= s[0] * s[0] + tol;
}

MuellerMatrix polarizer_mueller(double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    Eigen::Matrix4d m;
    m << 1.0, c, s, 0.0,
         c, c * c, c * s, 0.0,
         s, c * s, s * s, 0.0,
         0.0, 0.0, 0.0, 0.0;
    return {0.5 * m};
}

void validate_signal(std::span<const Rgb> signal) {
    for (std::size_t k = 0; k < signal.size(); ++k) {
        const Rgb& v = signal[k];
        if (!v.isFinite().all() || (v < 0.0).any())
            throw Error(ErrorCode::InvalidSignal, "sample " + std::to_string(k) + " is negative or not finite");
    }
}

SeparatedSignal separate(std::span<const Rgb> cross, std::span<const Rgb> parallel) {
    if (cross.size() != parallel.size())
        throw Error(ErrorCode::LengthMismatch, "cross has " + std::to_string(cross.size()) +
                                                   " samples, parallel has " + std::to_string(parallel.size()));
    SeparatedSignal out;
    out.diffuse.resize(cross.size());
    out.specular.resize(cross.size());
    for (std::size_t k = 0; k < cross.size(); ++k) {
        out.diffuse[k] = 2.0 * cross[k];
        out.specular[k] = (2.0 * parallel[k] - 2.0 * cross[k]).max(0.0);
    }
    return out;
}

std::vector<Direction3> spiral_directions(int n) {
    if (n < 4) throw Error(ErrorCode::InvalidCount, "spiral needs at least 4 directions, got " + std::to_string(n));
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Direction3> dirs(n);
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * k;
        dirs[k] = Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized();
    }
    return dirs;
}

LightRig LightRig::spiral(int n, double l0) {
    LightRig rig;
    rig.directions = spiral_directions(n);
    rig.l0 = l0;
    rig.a0 = 4.0 * kPi / n;
    rig.generator = "fibonacci-spiral";
    return rig;
}

void LightRig::validate() const {
    const int n = size();
    if (n < 4) throw Error(ErrorCode::InvalidCount, "light rig needs at least 4 directions, got " + std::to_string(n));
    if (!(l0 > 0.0) || !(a0 > 0.0) || !std::isfinite(kappa()))
        throw Error(ErrorCode::InvalidArgument, "light rig needs positive L0 and A0");
    for (int i = 0; i < n; ++i) {
        if (std::abs(directions[i].norm() - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "light direction " + std::to_string(i) + " is not unit length");
        for (int j = 0; j < i; ++j)
            if ((directions[i] - directions[j]).squaredNorm() < 1e-24)
                throw Error(ErrorCode::InvalidArgument,
                            "light directions " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
    }
    if (n >= 32) {
        std::array<bool, 8> seen{};
        for (const auto& d : directions)
            seen[(d.x() >= 0.0 ? 1 : 0) | (d.y() >= 0.0 ? 2 : 0) | (d.z() >= 0.0 ? 4 : 0)] = true;
        if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
            throw Error(ErrorCode::InvalidArgument, "light directions leave an octant of the sphere empty");
    }
}

void CameraPose::validate() const {
    if ((rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "camera rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9)
        throw Error(ErrorCode::InvalidArgument, "camera rotation has determinant != +1");
    if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0 || intrinsics(0, 0) <= 0.0 ||
        intrinsics(1, 1) <= 0.0 || intrinsics(2, 2) == 0.0)
        throw Error(ErrorCode::InvalidArgument, "camera intrinsics must be upper triangular with positive focal lengths");
    if (!translation.allFinite()) throw Error(ErrorCode::InvalidArgument, "camera translation is not finite");
}

Direction3 CameraPose::view_direction(double x, double y) const {
    const Vec3 ray_cam = intrinsics.triangularView<Eigen::Upper>().solve(Vec3(x + 0.5, y + 0.5, 1.0));
    return -normalized(rotation.transpose() * ray_cam);
}

CameraPose CameraPose::looking_down(int height, int width, double focal) {
    CameraPose pose;
    pose.rotation << 1.0, 0.0, 0.0,
                     0.0, -1.0, 0.0,
                     0.0, 0.0, -1.0;
    pose.translation = Vec3(0.0, 0.0, 10.0);
    pose.intrinsics << focal, 0.0, 0.5 * width,
                       0.0, focal, 0.5 * height,
                       0.0, 0.0, 1.0;
    return pose;
}

}  // namespace polarmat
