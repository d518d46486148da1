// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/synth.hpp"

#include <random>

#include "polarmat/parallel.hpp"

namespace polarmat {

NormalMap PolarizedOLATStack::view_directions() const {
    NormalMap out(height(), width());
    for (int y = 0; y < height(); ++y)
        for (int x = 0; x < width(); ++x) out(y, x) = fixed_view ? *fixed_view : pose.view_direction(x, y);
    return out;
}

void PolarizedOLATStack::validate() const {
    if (!cross.same_shape(parallel))
        throw Error(ErrorCode::DimensionMismatch, "cross and parallel stacks differ in shape");
    if (cross.count() != rig.size())
        throw Error(ErrorCode::DimensionMismatch, "stack has " + std::to_string(cross.count()) + " frames but rig has " +
                                                      std::to_string(rig.size()) + " lights");
    if (!ambient.empty() && !ambient.same_shape(height(), width()))
        throw Error(ErrorCode::DimensionMismatch, "ambient map does not match the image size");
    rig.validate();
    if (fixed_view) {
        if (std::abs(fixed_view->norm() - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "fixed view direction is not unit length");
    } else {
        pose.validate();
    }
}

std::size_t PolarizedOLATStack::polarization_violations(double noise_floor) const {
    std::size_t bad = 0;
    const auto& c = cross.values();
    const auto& p = parallel.values();
    for (std::size_t i = 0; i < c.size(); ++i)
        if (p[i] < c[i] - noise_floor) ++bad;
    return bad;
}

ShadingFrame GroundTruthMaterial::frame_at(int y, int x) const {
    return frame.empty() ? shading_frame(n_s(y, x)) : frame(y, x);
}

bool GroundTruthMaterial::visible(int y, int x, const Vec3& omega_i) const {
    if (occluder.empty()) return true;
    const Vec3& a = occluder(y, x);
    return a.isZero() || omega_i.dot(a) <= 0.0;
}

void GroundTruthMaterial::validate() const {
    const int h = height(), w = width();
    if (!rho_s.same_shape(h, w) || !n_d.same_shape(h, w) || !n_s.same_shape(h, w) || !lobe.same_shape(h, w))
        throw Error(ErrorCode::DimensionMismatch, "material maps differ in size");
    if (!frame.empty() && !frame.same_shape(h, w))
        throw Error(ErrorCode::DimensionMismatch, "frame map differs in size");
    if (!occluder.empty() && !occluder.same_shape(h, w))
        throw Error(ErrorCode::DimensionMismatch, "occluder map differs in size");
    for (std::size_t i = 0; i < rho_d.size(); ++i) {
        if (!rho_d[i].isFinite().all() || (rho_d[i] < 0.0).any() || !std::isfinite(rho_s[i]) || rho_s[i] < 0.0)
            throw Error(ErrorCode::InvalidArgument, "albedos must be finite and non-negative");
        if (std::abs(n_d[i].norm() - 1.0) > 1e-9 || std::abs(n_s[i].norm() - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidArgument, "material normals must be unit length");
        if (!lobe[i].valid()) throw Error(ErrorCode::InvalidArgument, "Ward sigma must be positive");
    }
}

GroundTruthMaterial GroundTruthMaterial::uniform(int height, int width, const Rgb& rho_d, double rho_s,
                                                 const Vec3& normal, const WardLobe& lobe) {
    GroundTruthMaterial m;
    const Vec3 n = normalized(normal);
    m.rho_d = RgbMap(height, width, rho_d);
    m.rho_s = ScalarMap(height, width, rho_s);
    m.n_d = NormalMap(height, width, n);
    m.n_s = NormalMap(height, width, n);
    m.lobe = Grid<WardLobe>(height, width, lobe);
    return m;
}

void ArtifactConfig::validate() const {
    if (!(overexposure_probability >= 0.0 && overexposure_probability <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "overexposure probability must lie in [0, 1]");
    if (overexposure_magnitude < 0.0 || lens_flare_strength < 0.0 || ambient_level < 0.0 || sensor_noise_stddev < 0.0)
        throw Error(ErrorCode::InvalidArgument, "artifact magnitudes must be non-negative");
}

namespace {

std::uint64_t pixel_seed(std::uint64_t seed, int y, int x) {
    // splitmix64 finalizer over the pixel position.
    std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(y) * 0x100000001B3ull +
                                                      static_cast<std::uint64_t>(x) + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

PolarizedOLATStack render_impl(const GroundTruthMaterial& material, const LightRig& rig, const NormalMap& views,
                               const ArtifactConfig& artifacts, std::uint64_t seed, int threads) {
    material.validate();
    rig.validate();
    artifacts.validate();
    const int h = material.height(), w = material.width(), n = rig.size();
    if (!views.same_shape(h, w)) throw Error(ErrorCode::DimensionMismatch, "view map does not match the material");
    for (const auto& inj : artifacts.interreflection)
        if (inj.y < 0 || inj.y >= h || inj.x < 0 || inj.x >= w || inj.light < 0 || inj.light >= n)
            throw Error(ErrorCode::DimensionMismatch, "inter-reflection injection outside the capture");

    PolarizedOLATStack out;
    out.cross = ImageStack(n, h, w);
    out.parallel = ImageStack(n, h, w);
    out.rig = rig;
    const double scale = rig.l0 * rig.a0;

    parallel_for(h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            std::mt19937_64 rng(pixel_seed(seed, y, x));
            std::uniform_real_distribution<double> uniform(0.0, 1.0);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const Vec3& nd = material.n_d(y, x);
            const Vec3& ns = material.n_s(y, x);
            const Vec3& wo = views(y, x);
            const ShadingFrame frame = material.frame_at(y, x);
            const WardLobe& lobe = material.lobe(y, x);
            for (int k = 0; k < n; ++k) {
                const Vec3& wi = rig.directions[k];
                // Fixed draw count per sample keeps streams aligned whatever
                // the configuration.
                const double u_cross = uniform(rng);
                const double u_par = uniform(rng);
                Rgb noise_c, noise_p;
                for (int c = 0; c < 3; ++c) noise_c[c] = gauss(rng);
                for (int c = 0; c < 3; ++c) noise_p[c] = gauss(rng);

                const double vis = material.visible(y, x, wi) ? 1.0 : 0.0;
                const Rgb diffuse = material.rho_d(y, x) * (scale * std::max(wi.dot(nd), 0.0) * vis);
                double spec = 0.0;
                if (material.rho_s(y, x) > 0.0 && wi.dot(ns) > 0.0 && wo.dot(ns) > 0.0)
                    spec = material.rho_s(y, x) * scale * ward_value(wi, wo, lobe, frame) * vis;

                Rgb cross = diffuse / 2.0 + artifacts.ambient_level;
                Rgb par = diffuse / 2.0 + spec / 2.0 + artifacts.ambient_level;

                if (u_cross < artifacts.overexposure_probability) {
                    cross += artifacts.overexposure_magnitude;
                    par += artifacts.overexposure_magnitude;
                }
                if (u_par < artifacts.overexposure_probability) par += artifacts.overexposure_magnitude;
                if (artifacts.lens_flare_enabled) {
                    const double facing = -wi.dot(wo);
                    if (facing > 0.0) {
                        cross += artifacts.lens_flare_strength * facing;
                        par += artifacts.lens_flare_strength * facing;
                    }
                }
                if (artifacts.sensor_noise_stddev > 0.0) {
                    cross = (cross + artifacts.sensor_noise_stddev * noise_c).max(0.0);
                    par = (par + artifacts.sensor_noise_stddev * noise_p).max(0.0);
                }
                out.cross.set_sample(k, y, x, cross);
                out.parallel.set_sample(k, y, x, par);
            }
        }
    });

    for (const auto& inj : artifacts.interreflection) {
        const Rgb c = out.cross.sample(inj.light, inj.y, inj.x) + inj.diffuse / 2.0;
        const Rgb p = out.parallel.sample(inj.light, inj.y, inj.x) + inj.diffuse / 2.0 + inj.specular / 2.0;
        out.cross.set_sample(inj.light, inj.y, inj.x, c);
        out.parallel.set_sample(inj.light, inj.y, inj.x, p);
    }

    if (artifacts.ambient_level > 0.0) out.ambient = RgbMap(h, w, Rgb::Constant(artifacts.ambient_level));
    return out;
}

}  // namespace

PolarizedOLATStack render_olat(const GroundTruthMaterial& material, const LightRig& rig, const CameraPose& pose,
                               const ArtifactConfig& artifacts, std::uint64_t seed, int threads) {
    pose.validate();
    NormalMap views(material.height(), material.width());
    for (int y = 0; y < views.height(); ++y)
        for (int x = 0; x < views.width(); ++x) views(y, x) = pose.view_direction(x, y);
    auto out = render_impl(material, rig, views, artifacts, seed, threads);
    out.pose = pose;
    return out;
}

PolarizedOLATStack render_olat(const GroundTruthMaterial& material, const LightRig& rig, const Direction3& omega_o,
                               const ArtifactConfig& artifacts, std::uint64_t seed, int threads) {
    const Vec3 wo = normalized(omega_o);
    auto out = render_impl(material, rig, NormalMap(material.height(), material.width(), wo), artifacts, seed, threads);
    out.fixed_view = wo;
    return out;
}

GradientResponse gradient_response(std::span<const Rgb> signal, const LightRig& rig) {
    if (static_cast<int>(signal.size()) != rig.size())
        throw Error(ErrorCode::LengthMismatch, "signal length does not match the rig");
    GradientResponse g{Rgb::Zero(), Rgb::Zero(), Rgb::Zero()};
    for (std::size_t k = 0; k < signal.size(); ++k)
        for (int j = 0; j < 3; ++j) g[j] += rig.directions[k][j] * signal[k];
    return g;
}

GradientImages synthesize_gradient_images(const ImageStack& diffuse, const ImageStack& specular, const LightRig& rig) {
    if (!diffuse.same_shape(specular) || diffuse.count() != rig.size())
        throw Error(ErrorCode::DimensionMismatch, "gradient synthesis needs matching stacks and rig");
    GradientImages out{Grid<GradientResponse>(diffuse.height(), diffuse.width()),
                       Grid<GradientResponse>(diffuse.height(), diffuse.width())};
    for (int y = 0; y < diffuse.height(); ++y)
        for (int x = 0; x < diffuse.width(); ++x) {
            out.diffuse(y, x) = gradient_response(diffuse.pixel(y, x), rig);
            out.specular(y, x) = gradient_response(specular.pixel(y, x), rig);
        }
    return out;
}

GradientImages synthesize_gradient_images(const PolarizedOLATStack& stack) {
    stack.validate();
    ImageStack d(stack.count(), stack.height(), stack.width());
    ImageStack s(stack.count(), stack.height(), stack.width());
    for (int y = 0; y < stack.height(); ++y)
        for (int x = 0; x < stack.width(); ++x) {
            const auto sep = separate(stack.cross.pixel(y, x), stack.parallel.pixel(y, x));
            d.set_pixel(y, x, sep.diffuse);
            s.set_pixel(y, x, sep.specular);
        }
    return synthesize_gradient_images(d, s, stack.rig);
}

}  // namespace polarmat
