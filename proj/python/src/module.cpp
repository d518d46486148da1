// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "polarmat/bundle.hpp"
#include "polarmat/pfm.hpp"
#include "polarmat/scene.hpp"

namespace py = pybind11;
using namespace polarmat;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Rgb> to_signal(const Array& a, const char* name) {
    if (a.size() == 0) return {};
    if (a.ndim() != 2 || a.shape(1) != 3)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must have shape (n, 3)");
    std::vector<Rgb> out(a.shape(0));
    auto r = a.unchecked<2>();
    for (py::ssize_t k = 0; k < a.shape(0); ++k) out[k] = Rgb(r(k, 0), r(k, 1), r(k, 2));
    return out;
}

Array from_signal(const std::vector<Rgb>& s) {
    Array out({static_cast<py::ssize_t>(s.size()), py::ssize_t{3}});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < s.size(); ++k)
        for (int c = 0; c < 3; ++c) w(k, c) = s[k][c];
    return out;
}

Vec3 to_vec3(const Array& a, const char* name) {
    if (a.ndim() != 1 || a.shape(0) != 3) throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must have 3 entries");
    return Vec3(a.at(0), a.at(1), a.at(2));
}

py::array_t<float> image_to_numpy(const PfmImage& img) {
    std::vector<py::ssize_t> shape{img.height, img.width};
    if (img.channels == 3) shape.push_back(3);
    py::array_t<float> out(shape);
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

PfmImage numpy_to_image(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 && !(a.ndim() == 3 && a.shape(2) == 3))
        throw Error(ErrorCode::DimensionMismatch, "image must have shape (h, w) or (h, w, 3)");
    PfmImage img;
    img.height = static_cast<int>(a.shape(0));
    img.width = static_cast<int>(a.shape(1));
    img.channels = a.ndim() == 3 ? 3 : 1;
    img.data.assign(a.data(), a.data() + a.size());
    return img;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Polarized OLAT material recovery";
    m.attr("__version__") = POLARMAT_VERSION;

    // Messages start with the error code name, e.g. "MissingFile: ...".
    py::register_exception<Error>(m, "PolarmatError", PyExc_RuntimeError);

    m.def("malus_intensity", &malus_intensity, py::arg("i0"), py::arg("theta"));

    m.def("polarizer_mueller", [](double theta) { return Eigen::Matrix4d(polarizer_mueller(theta).m); },
          py::arg("theta"));

    m.def(
        "separate",
        [](const Array& cross, const Array& parallel) {
            const auto s = separate(to_signal(cross, "cross"), to_signal(parallel, "parallel"));
            return py::make_tuple(from_signal(s.diffuse), from_signal(s.specular));
        },
        py::arg("cross"), py::arg("parallel"), "Returns (diffuse, specular), each of shape (n, 3).");

    m.def(
        "spiral_directions",
        [](int n) {
            const auto dirs = spiral_directions(n);
            Array out({static_cast<py::ssize_t>(n), py::ssize_t{3}});
            auto w = out.mutable_unchecked<2>();
            for (int k = 0; k < n; ++k)
                for (int c = 0; c < 3; ++c) w(k, c) = dirs[k][c];
            return out;
        },
        py::arg("n"));

    m.def(
        "ward_brdf",
        [](const Array& omega_i, const Array& omega_o, double sigma_x, double sigma_y, const Array& normal) {
            const WardLobeParams p{{sigma_x, sigma_y}, shading_frame(to_vec3(normal, "normal"))};
            return ward_brdf(to_vec3(omega_i, "omega_i"), to_vec3(omega_o, "omega_o"), p);
        },
        py::arg("omega_i"), py::arg("omega_o"), py::arg("sigma_x"), py::arg("sigma_y"),
        py::arg("normal") = Array(std::vector<py::ssize_t>{3}, std::vector<double>{0.0, 0.0, 1.0}.data()));

    m.def(
        "remove_overexposure",
        [](const Array& signal, double epsilon, int iterations, std::optional<double> delta) {
            const auto r = remove_overexposure(to_signal(signal, "signal"), epsilon, iterations, delta);
            py::array_t<bool> mask({static_cast<py::ssize_t>(r.removed.size()), py::ssize_t{3}});
            auto w = mask.mutable_unchecked<2>();
            for (std::size_t k = 0; k < r.removed.size(); ++k)
                for (int c = 0; c < 3; ++c) w(k, c) = r.removed[k][c];
            return py::make_tuple(from_signal(r.signal), mask);
        },
        py::arg("signal"), py::arg("epsilon") = 1.0, py::arg("iterations") = 2, py::arg("delta") = py::none(),
        "Returns (cleaned signal, removed mask).");

    m.def(
        "derive_anisotropy_roughness",
        [](double sigma_x, double sigma_y) {
            const auto r = derive_anisotropy_roughness({sigma_x, sigma_y});
            return py::make_tuple(r.anisotropy, r.roughness);
        },
        py::arg("sigma_x"), py::arg("sigma_y"));

    m.def("read_pfm", [](const std::filesystem::path& p) { return image_to_numpy(read_pfm(p)); }, py::arg("path"));
    m.def(
        "write_pfm",
        [](const std::filesystem::path& p, const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
            write_pfm(p, numpy_to_image(a));
        },
        py::arg("path"), py::arg("image"));

    m.def(
        "synthesize",
        [](const std::filesystem::path& out, const std::string& preset, int height, int width, int lights,
           std::uint64_t seed) {
            SceneConfig cfg;
            cfg.preset = preset;
            cfg.height = height;
            cfg.width = width;
            cfg.lights = lights;
            py::gil_scoped_release release;
            return write_capture(out, render_scene(make_scene(cfg), {}, seed));
        },
        py::arg("out"), py::arg("preset") = "mixed", py::arg("height") = 64, py::arg("width") = 64,
        py::arg("lights") = 346, py::arg("seed") = 0, "Renders an artifact-free capture; returns the manifest path.");

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& manifest, const std::filesystem::path& out, const std::string& stages,
           int threads) {
            const auto path = std::filesystem::is_directory(manifest) ? manifest / "manifest.json" : manifest;
            const CaptureManifest mf = read_manifest(path);
            PipelineConfig cfg = pipeline_config(mf);
            cfg.threads = threads;
            const Stage last = parse_stage_list(stages);
            py::gil_scoped_release release;
            const MaterialBundle b = run_pipeline(mf, cfg, last, out);
            return std::string(to_string(b.last_stage));
        },
        py::arg("manifest"), py::arg("out"), py::arg("stages") = "all", py::arg("threads") = 1,
        "Runs the pipeline and writes the bundle to `out`; returns the last stage run.");

    m.def("check_bundle", [](const std::filesystem::path& dir) { return check_bundle(dir); }, py::arg("dir"));
}
