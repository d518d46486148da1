// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

// polarmat: synthetic captures, pipeline runs and map inspection.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "polarmat/bundle.hpp"
#include "polarmat/pfm.hpp"
#include "polarmat/preview.hpp"
#include "polarmat/scene.hpp"

namespace fs = std::filesystem;
using namespace polarmat;

namespace {

struct PipelineFlags {
    std::string manifest;
    std::string out;
    std::string stages = "all";
    std::vector<std::string> solvers;
    std::optional<double> epsilon;
    std::optional<int> iterations;
    int threads = 1;
    bool no_specular_gate = false;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, bool with_stages) {
    cmd->add_option("--manifest", f.manifest, "Capture manifest (file or directory holding manifest.json)")->required();
    cmd->add_option("--out", f.out, "Bundle output directory")->required();
    if (with_stages)
        cmd->add_option("--stages", f.stages, "Comma-separated stages (separate,preprocess,init,optimize) or 'all'");
    cmd->add_option("--solver", f.solvers, "Solver override <kind>=<backend>, repeatable");
    cmd->add_option("--epsilon", f.epsilon, "Overexposure gap threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--iterations", f.iterations, "Overexposure removal passes")->check(CLI::Range(1, 1000));
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--no-specular-gate", f.no_specular_gate, "Keep below-ambient samples in the specular normal fit");
}

fs::path manifest_path(const std::string& arg) {
    fs::path p(arg);
    return fs::is_directory(p) ? p / "manifest.json" : p;
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

PipelineConfig make_config(const CaptureManifest& m, const PipelineFlags& f) {
    PipelineConfig c = pipeline_config(m);
    if (f.epsilon) c.overexposure.epsilon = *f.epsilon;
    if (f.iterations) c.overexposure.iterations = *f.iterations;
    c.threads = thread_count(f.threads);
    c.specular_normal_gate = !f.no_specular_gate;
    for (const auto& s : f.solvers) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--solver", "expected <kind>=<backend>, got '" + s + "'");
        try {
            c.solvers[parse_problem_kind(s.substr(0, eq))].backend = parse_backend(s.substr(eq + 1));
        } catch (const Error& e) {
            throw CLI::ValidationError("--solver", e.what());
        }
    }
    return c;
}

void report(const MaterialBundle& b, const fs::path& out) {
    std::size_t flagged = 0;
    for (auto f : b.flags.values()) flagged += f != 0;
    std::printf("%s: %dx%d, %d lights, stages through '%s'\n", out.string().c_str(), b.width, b.height, b.count,
                std::string(to_string(b.last_stage)).c_str());
    if (b.has(Stage::Preprocess)) std::printf("  overexposed samples replaced: %zu\n", b.sequences.removed_count());
    if (b.has(Stage::Init)) std::printf("  flagged pixels: %zu\n", flagged);
    if (b.has(Stage::Optimize)) std::printf("  solver problems: %zu\n", b.diagnostics.size());
}

// ---------------------------------------------------------------------------
// inspect

struct ChannelStats {
    double min = INFINITY;
    double max = -INFINITY;
    double mean = 0.0;
    std::size_t non_finite = 0;
};

std::vector<ChannelStats> channel_stats(const PfmImage& img) {
    std::vector<ChannelStats> out(img.channels);
    std::vector<std::size_t> n(img.channels, 0);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        auto& s = out[i % img.channels];
        const double v = img.data[i];
        if (!std::isfinite(v)) {
            ++s.non_finite;
            continue;
        }
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        s.mean += v;
        ++n[i % img.channels];
    }
    for (int c = 0; c < img.channels; ++c) out[c].mean = n[c] ? out[c].mean / n[c] : 0.0;
    return out;
}

bool looks_like_normals(const PfmImage& img) {
    if (img.channels != 3) return false;
    std::size_t nonzero = 0, unit = 0;
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
        const double len = std::hypot(img.data[i], img.data[i + 1], img.data[i + 2]);
        if (len == 0.0) continue;
        ++nonzero;
        unit += std::abs(len - 1.0) < 1e-3;
    }
    return nonzero > 0 && unit * 10 >= nonzero * 9;
}

struct InspectOptions {
    std::vector<std::string> paths;
    std::string png;
    std::string style = "auto";
    std::vector<double> range;
    double tolerance = 1e-5;
};

PreviewStyle pick_style(const std::string& requested, const PfmImage& img, bool unit) {
    if (requested == "scalar") return PreviewStyle::Scalar;
    if (requested == "color") return PreviewStyle::Color;
    if (requested == "normal") return PreviewStyle::Normal;
    if (img.channels == 1) return PreviewStyle::Scalar;
    return unit ? PreviewStyle::Normal : PreviewStyle::Color;
}

const char* style_name(PreviewStyle s) {
    switch (s) {
        case PreviewStyle::Scalar: return "scalar";
        case PreviewStyle::Color: return "color";
        case PreviewStyle::Normal: return "normal";
    }
    return "?";
}

// Prints statistics of one map and optionally writes its preview.
void inspect_map(const fs::path& file, const InspectOptions& opt, std::optional<bool> declared_unit,
                 const fs::path& png, bool preview) {
    const PfmImage img = read_pfm(file);
    const bool unit = declared_unit.value_or(opt.style == "normal" || looks_like_normals(img));
    const PreviewStyle style = pick_style(opt.style, img, unit);
    std::printf("%s: %dx%d, %d channel%s, %s\n", file.string().c_str(), img.width, img.height, img.channels,
                img.channels == 1 ? "" : "s", style_name(style));
    const auto stats = channel_stats(img);
    std::printf("  %-7s %14s %14s %14s\n", "channel", "min", "max", "mean");
    for (int c = 0; c < img.channels; ++c) {
        std::printf("  %-7d %14.6g %14.6g %14.6g", c, stats[c].min, stats[c].max, stats[c].mean);
        if (stats[c].non_finite) std::printf("  (%zu non-finite)", stats[c].non_finite);
        std::printf("\n");
    }
    if (unit && img.channels == 3) {
        std::size_t violations = 0, zero = 0;
        for (std::size_t i = 0; i < img.data.size(); i += 3) {
            const double len = std::sqrt(double(img.data[i]) * img.data[i] + double(img.data[i + 1]) * img.data[i + 1] +
                                         double(img.data[i + 2]) * img.data[i + 2]);
            if (len == 0.0)
                ++zero;
            else if (std::abs(len - 1.0) > opt.tolerance)
                ++violations;
        }
        std::printf("  unit-norm violations: %zu (tolerance %g), zero vectors: %zu\n", violations, opt.tolerance, zero);
    }
    if (preview) {
        std::optional<PreviewRange> range;
        if (opt.range.size() == 2) range = PreviewRange{opt.range[0], opt.range[1]};
        write_png(png, make_preview(img, style, range));
        std::printf("  preview: %s\n", png.string().c_str());
    }
}

void inspect(const InspectOptions& opt) {
    for (const auto& arg : opt.paths) {
        const fs::path p(arg);
        if (fs::is_directory(p)) {
            // Whole bundle: every per-pixel map, previews into --png as a directory.
            if (!opt.png.empty()) fs::create_directories(opt.png);
            for (const auto& m : read_bundle_index(p)) {
                if (m.layout != "map") continue;
                inspect_map(p / m.file, opt, m.unit_norm, fs::path(opt.png) / (m.name + ".png"), !opt.png.empty());
            }
            const auto problems = check_bundle(p, opt.tolerance);
            for (const auto& msg : problems) std::printf("range violation: %s\n", msg.c_str());
            if (problems.empty()) std::printf("all declared ranges hold\n");
            continue;
        }
        std::optional<bool> unit;
        if (fs::exists(p.parent_path() / "bundle.json"))
            for (const auto& m : read_bundle_index(p.parent_path()))
                if (m.file == p.filename().string()) unit = m.unit_norm;
        fs::path png = opt.png;
        if (!png.empty() && opt.paths.size() > 1) {
            fs::create_directories(png);
            png /= p.stem().string() + ".png";
        }
        inspect_map(p, opt, unit, png, !opt.png.empty());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarized OLAT material capture: synthesis, separation, estimation and refinement"};
    app.set_version_flag("--version", std::string(POLARMAT_VERSION));
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // synth
    SceneConfig scene;
    ArtifactConfig artifacts;
    std::uint64_t seed = 0;
    std::string synth_out;
    int synth_threads = 1;
    OverexposureConfig synth_overexposure;
    auto* synth = app.add_subcommand("synth", "Render a synthetic polarized capture and its ground truth");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", seed, "Random seed for artifacts and noise");
    synth->add_option("--preset", scene.preset, "Material layout")->check(CLI::IsMember(scene_presets()));
    synth->add_option("--height", scene.height, "Image height")->check(CLI::Range(1, 4096));
    synth->add_option("--width", scene.width, "Image width")->check(CLI::Range(1, 4096));
    synth->add_option("--lights", scene.lights, "Number of spiral lights")->check(CLI::Range(4, 100000));
    synth->add_option("--tilt", scene.max_tilt_degrees, "Dome slope at the image corners (degrees)");
    synth->add_option("--spike-probability", artifacts.overexposure_probability, "Per-sample spike probability")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--spike-magnitude", artifacts.overexposure_magnitude, "Spike magnitude")
        ->check(CLI::NonNegativeNumber);
    synth->add_flag("--flare", artifacts.lens_flare_enabled, "Add lens flare for lights facing the camera");
    synth->add_option("--ambient", artifacts.ambient_level, "Constant ambient level")->check(CLI::NonNegativeNumber);
    synth->add_option("--noise", artifacts.sensor_noise_stddev, "Gaussian sensor noise sigma")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--epsilon", synth_overexposure.epsilon, "Overexposure threshold recorded in the manifest")
        ->check(CLI::PositiveNumber);
    synth->add_option("--iterations", synth_overexposure.iterations, "Overexposure passes recorded in the manifest")
        ->check(CLI::Range(1, 1000));
    synth->add_option("--threads", synth_threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    PipelineFlags run_flags, pre_flags, fit_flags;
    std::string fit_from;
    auto* run = app.add_subcommand("run", "Run the pipeline on a capture");
    add_pipeline_flags(run, run_flags, true);
    auto* pre = app.add_subcommand("preprocess", "Separate and clean a capture (stages separate,preprocess)");
    add_pipeline_flags(pre, pre_flags, false);
    auto* fit = app.add_subcommand("fit", "Continue a dumped bundle through init and optimize");
    add_pipeline_flags(fit, fit_flags, true);
    fit->add_option("--from", fit_from, "Bundle to continue (defaults to --out)");

    InspectOptions inspect_opt;
    auto* insp = app.add_subcommand("inspect", "Print map statistics and write false-colour previews");
    insp->add_option("paths", inspect_opt.paths, "PFM files or bundle directories")->required();
    insp->add_option("--png", inspect_opt.png, "Preview file (directory for bundles or several files)");
    insp->add_option("--style", inspect_opt.style, "Preview style")
        ->check(CLI::IsMember({"auto", "scalar", "color", "normal"}));
    insp->add_option("--range", inspect_opt.range, "Preview value range lo hi")->expected(2);
    insp->add_option("--tolerance", inspect_opt.tolerance, "Unit-norm tolerance")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) {
            const SyntheticScene s = make_scene(scene);
            const PolarizedOLATStack stack = render_scene(s, artifacts, seed, thread_count(synth_threads));
            const fs::path out(synth_out);
            const fs::path manifest = write_capture(out, stack, synth_overexposure);
            const fs::path truth = out / "truth";
            fs::create_directories(truth);
            const auto& m = s.material;
            ScalarMap sx(m.height(), m.width()), sy(m.height(), m.width());
            for (std::size_t i = 0; i < m.lobe.size(); ++i) {
                sx[i] = m.lobe[i].sigma_x;
                sy[i] = m.lobe[i].sigma_y;
            }
            write_pfm(truth / "rho_d.pfm", to_pfm(m.rho_d));
            write_pfm(truth / "rho_s.pfm", to_pfm(m.rho_s));
            write_pfm(truth / "n_d.pfm", to_pfm(m.n_d));
            write_pfm(truth / "n_s.pfm", to_pfm(m.n_s));
            write_pfm(truth / "sigma_x.pfm", to_pfm(sx));
            write_pfm(truth / "sigma_y.pfm", to_pfm(sy));
            std::printf("%s: %dx%d, %d lights, preset '%s', seed %llu\n", manifest.string().c_str(), scene.width,
                        scene.height, scene.lights, scene.preset.c_str(), static_cast<unsigned long long>(seed));
            return 0;
        }
        auto run_with = [&](const PipelineFlags& f, Stage last, const std::string& from) {
            const CaptureManifest m = read_manifest(manifest_path(f.manifest));
            const PipelineConfig config = make_config(m, f);
            const MaterialBundle b = from.empty() ? run_pipeline(m, config, last, f.out)
                                                  : continue_pipeline(m, config, from, last, f.out);
            report(b, f.out);
        };
        if (*run) run_with(run_flags, parse_stage_list(run_flags.stages), "");
        if (*pre) run_with(pre_flags, Stage::Preprocess, "");
        if (*fit) run_with(fit_flags, parse_stage_list(fit_flags.stages), fit_from.empty() ? fit_flags.out : fit_from);
        if (*insp) inspect(inspect_opt);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "polarmat: %s\n", e.what());
        return 1;
    }
    return 0;
}
