// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/ward.hpp"

namespace polarmat {

bool ShadingFrame::is_orthonormal(double tol) const {
    return std::abs(n.norm() - 1.0) <= tol && std::abs(b.norm() - 1.0) <= tol && std::abs(t.norm() - 1.0) <= tol &&
           std::abs(n.dot(b)) <= tol && std::abs(n.dot(t)) <= tol && std::abs(b.dot(t)) <= tol &&
           (t.cross(b) - n).norm() <= tol;
}

ShadingFrame shading_frame(const Vec3& normal) {
    ShadingFrame f;
    f.n = normalized(normal);
    const Vec3 ref = std::abs(f.n.x()) > 0.99 ? Vec3::UnitY() : Vec3::UnitX();
    f.t = normalized(ref - ref.dot(f.n) * f.n);
    f.b = f.n.cross(f.t);
    return f;
}

namespace {

struct HalfTerms {
    double cos_i, cos_o, ht, hb, hn;
};

std::optional<HalfTerms> half_terms(const Vec3& wi, const Vec3& wo, const ShadingFrame& frame) {
    const double cos_i = wi.dot(frame.n);
    const double cos_o = wo.dot(frame.n);
    if (!(cos_i > 0.0) || !(cos_o > 0.0)) return std::nullopt;
    const Vec3 h = (wi + wo).normalized();
    return HalfTerms{cos_i, cos_o, h.dot(frame.t), h.dot(frame.b), h.dot(frame.n)};
}

}  // namespace

std::optional<WardLogTerms> ward_log_terms(const Vec3& omega_i, const Vec3& omega_o, const WardLobe& lobe,
                                           const ShadingFrame& frame) {
    const auto ht = half_terms(omega_i, omega_o, frame);
    if (!ht) return std::nullopt;
    const double ax = ht->ht / lobe.sigma_x;
    const double ay = ht->hb / lobe.sigma_y;
    const double denom = 1.0 + ht->hn;
    WardLogTerms out;
    out.log_value = -2.0 * (ax * ax + ay * ay) / denom - std::log(4.0 * kPi * lobe.sigma_x * lobe.sigma_y) -
                    0.5 * std::log(ht->cos_i * ht->cos_o);
    out.d_log_sx = -1.0 + 4.0 * ax * ax / denom;
    out.d_log_sy = -1.0 + 4.0 * ay * ay / denom;
    return out;
}

double ward_value(const Vec3& omega_i, const Vec3& omega_o, const WardLobe& lobe, const ShadingFrame& frame) {
    const auto ht = half_terms(omega_i, omega_o, frame);
    if (!ht) return 0.0;
    const double ax = ht->ht / lobe.sigma_x;
    const double ay = ht->hb / lobe.sigma_y;
    return std::exp(-2.0 * (ax * ax + ay * ay) / (1.0 + ht->hn)) /
           (4.0 * kPi * lobe.sigma_x * lobe.sigma_y * std::sqrt(ht->cos_o * ht->cos_i));
}

double ward_brdf(const Vec3& omega_i, const Vec3& omega_o, const WardLobeParams& params) {
    if (!params.lobe.valid()) throw Error(ErrorCode::InvalidArgument, "Ward sigma must be positive");
    if (!(omega_i.dot(params.frame.n) > 0.0) || !(omega_o.dot(params.frame.n) > 0.0))
        throw Error(ErrorCode::BelowHorizon, "incident or outgoing direction below the shading horizon");
    return ward_value(omega_i, omega_o, params.lobe, params.frame);
}

}  // namespace polarmat
