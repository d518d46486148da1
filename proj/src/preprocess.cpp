// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/preprocess.hpp"

#include <algorithm>
#include <numeric>

#include "polarmat/parallel.hpp"

namespace polarmat {

SeparatedStack separate_stack(const PolarizedOLATStack& stack, int threads) {
    stack.validate();
    for (const ImageStack* s : {&stack.cross, &stack.parallel}) {
        const auto& v = s->values();
        const auto bad = std::find_if(v.begin(), v.end(), [](float f) { return !std::isfinite(f); });
        if (bad != v.end()) {
            const auto i = static_cast<std::size_t>(bad - v.begin()) / 3;
            const std::size_t per_frame = static_cast<std::size_t>(stack.height()) * stack.width();
            const auto k = i / per_frame, yx = i % per_frame;
            throw Error(ErrorCode::InvalidSignal,
                        std::string(s == &stack.cross ? "cross" : "parallel") + " sample at light " +
                            std::to_string(k) + ", pixel (" + std::to_string(yx / stack.width()) + ", " +
                            std::to_string(yx % stack.width()) + ") is not finite");
        }
    }
    SeparatedStack out{ImageStack(stack.count(), stack.height(), stack.width()),
                       ImageStack(stack.count(), stack.height(), stack.width())};
    parallel_for(stack.height(), threads, [&](int y) {
        for (int x = 0; x < stack.width(); ++x) {
            const auto sep = separate(stack.cross.pixel(y, x), stack.parallel.pixel(y, x));
            out.diffuse.set_pixel(y, x, sep.diffuse);
            out.specular.set_pixel(y, x, sep.specular);
        }
    });
    return out;
}

std::size_t OverexposureResult::removed_count() const {
    std::size_t n = 0;
    for (const auto& m : removed) n += static_cast<std::size_t>(m[0]) + m[1] + m[2];
    return n;
}

double overexposure_delta(std::span<const double> channel, double epsilon) {
    if (channel.empty()) throw Error(ErrorCode::EmptySignal, "cannot compute delta of an empty signal");
    std::vector<double> v(channel.begin(), channel.end());
    std::sort(v.begin(), v.end());
    std::size_t drop = static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(v.size())));
    drop = std::min(drop, v.size() - 1);
    const std::size_t keep = v.size() - drop;
    const double mean = std::accumulate(v.begin(), v.begin() + keep, 0.0) / static_cast<double>(keep);
    return std::min(mean, epsilon / 10.0);
}

OverexposureResult remove_overexposure(std::span<const Rgb> signal, double epsilon, int iterations,
                                       std::optional<double> delta) {
    if (signal.empty()) throw Error(ErrorCode::EmptySignal, "overexposure removal needs a non-empty signal");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");

    const std::size_t n = signal.size();
    OverexposureResult out{PixelSignal(signal.begin(), signal.end()), std::vector<std::array<bool, 3>>(n, {false, false, false})};
    std::vector<double> channel(n);
    std::vector<std::size_t> order(n);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < n; ++k) channel[k] = signal[k][c];
        const double d = delta ? *delta : overexposure_delta(channel, epsilon);
        for (int iter = 0; iter < iterations; ++iter) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return channel[a] > channel[b]; });
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (channel[order[i]] - channel[order[i + 1]] > epsilon) {
                    channel[order[i]] = channel[order[i + 1]] + d;
                    out.removed[order[i]][c] = true;
                    break;
                }
            }
        }
        for (std::size_t k = 0; k < n; ++k) out.signal[k][c] = channel[k];
    }
    return out;
}

std::size_t CleanStack::removed_count() const {
    return static_cast<std::size_t>(std::count(removed_diffuse.begin(), removed_diffuse.end(), 1) +
                                    std::count(removed_specular.begin(), removed_specular.end(), 1));
}

CleanStack clean_stack(const SeparatedStack& separated, const OverexposureConfig& config, int threads) {
    if (!separated.diffuse.same_shape(separated.specular))
        throw Error(ErrorCode::DimensionMismatch, "diffuse and specular sequences differ in shape");
    const int n = separated.diffuse.count(), h = separated.diffuse.height(), w = separated.diffuse.width();
    CleanStack out{separated.diffuse, separated.specular, std::vector<unsigned char>(separated.diffuse.values().size(), 0),
                   std::vector<unsigned char>(separated.specular.values().size(), 0)};
    if (n == 0) return out;
    auto clean_one = [&](const ImageStack& src, ImageStack& dst, std::vector<unsigned char>& mask, int y, int x) {
        const auto r = remove_overexposure(src.pixel(y, x), config.epsilon, config.iterations);
        dst.set_pixel(y, x, r.signal);
        for (int k = 0; k < n; ++k)
            for (int c = 0; c < 3; ++c)
                if (r.removed[k][c]) mask[((static_cast<std::size_t>(k) * h + y) * w + x) * 3 + c] = 1;
    };
    parallel_for(h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            clean_one(separated.diffuse, out.diffuse, out.removed_diffuse, y, x);
            clean_one(separated.specular, out.specular, out.removed_specular, y, x);
        }
    });
    return out;
}

Rgb ambient_estimate(std::span<const Rgb> signal) {
    if (signal.empty()) throw Error(ErrorCode::EmptySignal, "cannot estimate ambient of an empty signal");
    std::vector<std::size_t> order(signal.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return luminance(signal[a]) < luminance(signal[b]); });
    const std::size_t count =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(signal.size()))));
    Rgb sum = Rgb::Zero();
    for (std::size_t i = 0; i < count; ++i) sum += signal[order[i]];
    return sum / static_cast<double>(count);
}

RgbMap ambient_map(const ImageStack& sequence, int threads) {
    RgbMap out(sequence.height(), sequence.width());
    parallel_for(sequence.height(), threads, [&](int y) {
        for (int x = 0; x < sequence.width(); ++x) out(y, x) = ambient_estimate(sequence.pixel(y, x));
    });
    return out;
}

AmbientMaps ambient_gates(const CleanStack& clean, const RgbMap& measured_ambient, int threads) {
    AmbientMaps out;
    if (measured_ambient.empty()) {
        out.diffuse = ambient_map(clean.diffuse, threads);
    } else {
        if (!measured_ambient.same_shape(clean.diffuse.height(), clean.diffuse.width()))
            throw Error(ErrorCode::DimensionMismatch, "ambient map does not match the capture size");
        out.diffuse = measured_ambient;
        for (auto& v : out.diffuse.values()) v *= 2.0;
    }
    out.specular = ambient_map(clean.specular, threads);
    return out;
}

namespace {

void check_signal_rig(std::span<const Rgb> signal, const LightRig& rig) {
    if (static_cast<int>(signal.size()) != rig.size())
        throw Error(ErrorCode::LengthMismatch, "signal has " + std::to_string(signal.size()) + " samples, rig has " +
                                                   std::to_string(rig.size()) + " lights");
}

}  // namespace

std::vector<bool> visibility(std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig, const Vec3& normal) {
    check_signal_rig(signal, rig);
    std::vector<bool> nu(signal.size());
    for (std::size_t k = 0; k < signal.size(); ++k)
        nu[k] = above_ambient(signal[k], zeta) && normal.dot(rig.directions[k]) > 0.0;
    return nu;
}

Rgb interreflection(std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig, const Vec3& normal) {
    check_signal_rig(signal, rig);
    Rgb sum = Rgb::Zero();
    for (std::size_t k = 0; k < signal.size(); ++k) {
        const double below = -rig.directions[k].dot(normal);
        if (below > 0.0 && above_ambient(signal[k], zeta)) sum += below * signal[k];
    }
    return sum;
}

double occlusion(std::span<const Rgb> signal, const Rgb& zeta, const LightRig& rig, const Vec3& normal) {
    check_signal_rig(signal, rig);
    double sum = 0.0;
    for (std::size_t k = 0; k < signal.size(); ++k) {
        const double cosine = rig.directions[k].dot(normal);
        if (cosine > 0.0 && above_ambient(signal[k], zeta)) sum += cosine;
    }
    return 4.0 * sum / static_cast<double>(signal.size());
}

namespace {

void check_geometry_inputs(const CleanStack& clean, const SurfaceNormals& normals, const AmbientMaps& zeta,
                           const LightRig& rig) {
    const int h = clean.diffuse.height(), w = clean.diffuse.width();
    if (!clean.diffuse.same_shape(clean.specular) || clean.diffuse.count() != rig.size() ||
        !normals.diffuse.same_shape(h, w) || !normals.specular.same_shape(h, w) || !zeta.diffuse.same_shape(h, w) ||
        !zeta.specular.same_shape(h, w))
        throw Error(ErrorCode::DimensionMismatch, "geometry inputs disagree in size");
}

}  // namespace

InterreflectionMaps interreflection_map(const CleanStack& clean, const SurfaceNormals& normals,
                                        const AmbientMaps& zeta, const LightRig& rig, int threads) {
    const auto g = compute_geometry(clean, normals, zeta, rig, threads);
    return {g.interreflection_d, g.interreflection_s};
}

OcclusionMaps occlusion_map(const CleanStack& clean, const SurfaceNormals& normals, const AmbientMaps& zeta,
                            const LightRig& rig, int threads) {
    const auto g = compute_geometry(clean, normals, zeta, rig, threads);
    return {g.tau_d, g.tau_s};
}

GeometryMaps compute_geometry(const CleanStack& clean, const SurfaceNormals& normals, const AmbientMaps& zeta,
                              const LightRig& rig, int threads) {
    check_geometry_inputs(clean, normals, zeta, rig);
    const int n = rig.size(), h = clean.diffuse.height(), w = clean.diffuse.width();
    GeometryMaps out{LightMask(h, w, n), LightMask(h, w, n), ScalarMap(h, w), ScalarMap(h, w),
                     RgbMap(h, w, Rgb::Zero()), ScalarMap(h, w)};
    parallel_for(h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const PixelSignal d = clean.diffuse.pixel(y, x);
            const PixelSignal s = clean.specular.pixel(y, x);
            const Vec3& nd = normals.diffuse(y, x);
            const Vec3& ns = normals.specular(y, x);
            const auto vd = visibility(d, zeta.diffuse(y, x), rig, nd);
            const auto vs = visibility(s, zeta.specular(y, x), rig, ns);
            for (int k = 0; k < n; ++k) {
                out.visibility_d.set(y, x, k, vd[k]);
                out.visibility_s.set(y, x, k, vs[k]);
            }
            out.tau_d(y, x) = occlusion(d, zeta.diffuse(y, x), rig, nd);
            out.tau_s(y, x) = occlusion(s, zeta.specular(y, x), rig, ns);
            out.interreflection_d(y, x) = interreflection(d, zeta.diffuse(y, x), rig, nd);
            out.interreflection_s(y, x) = luminance(interreflection(s, zeta.specular(y, x), rig, ns));
        }
    });
    return out;
}

ScalarMap shadow_compensate(const ScalarMap& albedo, const ScalarMap& tau, double floor) {
    if (!(floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "shadow floor must be positive");
    if (!tau.same_shape(albedo.height(), albedo.width()))
        throw Error(ErrorCode::DimensionMismatch, "occlusion map does not match the albedo map");
    ScalarMap out = albedo;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = albedo[i] / std::max(tau[i], floor);
    return out;
}

RgbMap shadow_compensate(const RgbMap& albedo, const ScalarMap& tau, double floor) {
    if (!(floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "shadow floor must be positive");
    if (!tau.same_shape(albedo.height(), albedo.width()))
        throw Error(ErrorCode::DimensionMismatch, "occlusion map does not match the albedo map");
    RgbMap out = albedo;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = albedo[i] / std::max(tau[i], floor);
    return out;
}

}  // namespace polarmat
