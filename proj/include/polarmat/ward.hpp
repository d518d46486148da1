// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "polarmat/core.hpp"

namespace polarmat {

/// Local shading frame [n, b, t] with n = t x b.
struct ShadingFrame {
    Vec3 n = Vec3::UnitZ();
    Vec3 b = Vec3::UnitY();
    Vec3 t = Vec3::UnitX();

    bool is_orthonormal(double tol = 1e-9) const;
};

/// Frame aligned to `normal`: t is the global +x axis projected onto the
/// tangent plane (+y when the normal is within ~8 degrees of the x axis),
/// b = n x t. Estimation and synthesis share this convention so sigma_x is
/// always measured along the same tangent direction.
ShadingFrame shading_frame(const Vec3& normal);

/// Ward lobe standard deviations along the tangent (x) and bitangent (y).
struct WardLobe {
    double sigma_x = 0.2;
    double sigma_y = 0.2;

    bool valid() const { return sigma_x > 0.0 && sigma_y > 0.0; }
};

struct WardLobeParams {
    WardLobe lobe;
    ShadingFrame frame;
};

/// Anisotropic Ward density
///   exp(-2 ((h.t/sx)^2 + (h.b/sy)^2) / (1 + h.n)) / (4 pi sx sy sqrt((wo.n)(wi.n)))
/// with h the normalized half vector. Throws BelowHorizon when either
/// direction is not strictly above the surface.
double ward_brdf(const Vec3& omega_i, const Vec3& omega_o, const WardLobeParams& params);

/// Same density, returning 0 below the horizon instead of throwing.
double ward_value(const Vec3& omega_i, const Vec3& omega_o, const WardLobe& lobe, const ShadingFrame& frame);

/// Natural log of the density and its derivatives with respect to
/// (log sigma_x, log sigma_y). Empty below the horizon. Working in the log
/// domain keeps sharp lobes representable far from the peak.
struct WardLogTerms {
    double log_value = 0.0;
    double d_log_sx = 0.0;
    double d_log_sy = 0.0;
};
std::optional<WardLogTerms> ward_log_terms(const Vec3& omega_i, const Vec3& omega_o, const WardLobe& lobe,
                                           const ShadingFrame& frame);

}  // namespace polarmat
