// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "polarmat/bundle.hpp"
#include "polarmat/pfm.hpp"
#include "polarmat/preview.hpp"
#include "polarmat/scene.hpp"

using namespace polarmat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(POLARMAT_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

template <class T>
bool same_bytes(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

PolarizedOLATStack small_capture(int n, int h, int w, std::uint64_t seed = 1) {
    SceneConfig cfg;
    cfg.height = h;
    cfg.width = w;
    cfg.lights = n;
    return render_scene(make_scene(cfg), {}, seed);
}

#ifndef POLARMAT_NO_CLI
int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + POLARMAT_CLI + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string cli_output(const std::string& args) {
    const std::string cmd = std::string("\"") + POLARMAT_CLI + "\" " + args + " 2>&1";
    std::string out;
    if (FILE* f = popen(cmd.c_str(), "r")) {
        char buf[4096];
        while (std::size_t n = std::fread(buf, 1, sizeof buf, f)) out.append(buf, n);
        pclose(f);
    }
    return out;
}
#endif

}  // namespace

TEST_CASE("pfm round trip is bitwise") {
    const fs::path dir = scratch("pfm");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-1e6f, 1e6f);
    ImageStack stack(5, 7, 3);
    for (auto& v : stack.values()) v = u(rng);
    stack.values()[0] = std::numeric_limits<float>::denorm_min();
    stack.values()[1] = -0.0f;
    write_pfm(dir / "s.pfm", stack_to_pfm(stack));
    const ImageStack back = stack_from_pfm(read_pfm(dir / "s.pfm"), 5);
    CHECK(std::memcmp(back.values().data(), stack.values().data(), stack.values().size() * 4) == 0);

    const PfmImage grey{3, 2, 1, {1, 2, 3, 4, 5, 6}};
    write_pfm(dir / "g.pfm", grey);
    CHECK(read_pfm(dir / "g.pfm") == grey);
}

TEST_CASE("pfm byte layout") {
    const fs::path dir = scratch("pfm_layout");
    const PfmImage img{1, 2, 1, {1.0f, 2.0f}};  // top row 1, bottom row 2
    write_pfm(dir / "a.pfm", img);
    const std::string bytes = slurp(dir / "a.pfm");
    CHECK(bytes.substr(0, 10) == "Pf\n1 2\n-1.");
    const std::size_t data = bytes.size() - 8;
    float first;
    std::memcpy(&first, bytes.data() + data, 4);
    CHECK(first == 2.0f);  // rows are stored bottom to top
    CHECK(static_cast<unsigned char>(bytes[data + 3]) == 0x40);  // little-endian 2.0f = 00 00 00 40
}

TEST_CASE("pfm reads big-endian files") {
    const fs::path dir = scratch("pfm_be");
    std::ofstream out(dir / "be.pfm", std::ios::binary);
    out << "Pf\n2 1\n1.0\n";
    const unsigned char data[] = {0x3f, 0x80, 0x00, 0x00, 0x40, 0x00, 0x00, 0x00};
    out.write(reinterpret_cast<const char*>(data), sizeof data);
    out.close();
    const PfmImage img = read_pfm(dir / "be.pfm");
    CHECK(img.data == std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("pfm errors") {
    const fs::path dir = scratch("pfm_err");
    PfmImage img{2, 2, 3, std::vector<float>(12, 0.5f)};
    img.data[7] = NAN;
    CHECK(code_of([&] { write_pfm(dir / "nan.pfm", img); }) == ErrorCode::CorruptImage);
    img.data[7] = 0.5f;
    write_pfm(dir / "ok.pfm", img);
    const std::string bytes = slurp(dir / "ok.pfm");
    {
        std::ofstream t(dir / "trunc.pfm", std::ios::binary);
        t.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
    }
    CHECK(code_of([&] { read_pfm(dir / "trunc.pfm"); }) == ErrorCode::CorruptImage);
    const std::string msg = message_of([&] { read_pfm(dir / "trunc.pfm"); });
    CHECK(msg.find("byte offset " + std::to_string(bytes.size() - 5)) != std::string::npos);
    {
        std::ofstream t(dir / "magic.pfm", std::ios::binary);
        t << "P6\n2 2\n255\n";
    }
    CHECK(code_of([&] { read_pfm(dir / "magic.pfm"); }) == ErrorCode::CorruptImage);
    CHECK(code_of([&] { read_pfm(dir / "absent.pfm"); }) == ErrorCode::MissingFile);
}

TEST_CASE("minimal manifest round trips") {
    const fs::path dir = scratch("manifest_min");
    const auto stack = small_capture(4, 2, 2);
    const fs::path path = write_capture(dir, stack);
    const CaptureManifest m = read_manifest(path);
    CHECK(m.count == 4);
    CHECK(m.rig.generator == "fibonacci-spiral");
    write_manifest(dir / "again.json", m);
    const CaptureManifest again = read_manifest(dir / "again.json");
    CHECK(same_manifest(m, again));
    CHECK(slurp(path) == slurp(dir / "again.json"));

    CaptureManifest explicit_dirs = m;
    explicit_dirs.rig.generator.clear();
    explicit_dirs.rig.a0 = 0.125;
    explicit_dirs.solvers[ProblemKind::Sigma].backend = Backend::NonlinearCG;
    explicit_dirs.overexposure = {0.75, 3};
    explicit_dirs.solvers[ProblemKind::Sigma].line_search.max_step_length = 2.5;
    write_manifest(dir / "explicit.json", explicit_dirs);
    CHECK(same_manifest(explicit_dirs, read_manifest(dir / "explicit.json")));

    const auto back = read_stack(m);
    CHECK(back.cross == stack.cross);
    CHECK(back.parallel == stack.parallel);
}

TEST_CASE("manifest validation") {
    const fs::path dir = scratch("manifest_bad");
    const auto stack = small_capture(346, 2, 2);
    write_capture(dir, stack);
    const std::string text = slurp(dir / "manifest.json");

    SUBCASE("missing file index") {
        CaptureManifest m = parse_manifest(text, dir);
        m.cross_files.pop_back();
        write_manifest(dir / "short.json", m);
        CHECK(code_of([&] { read_manifest(dir / "short.json"); }) == ErrorCode::MissingFile);
        CHECK(message_of([&] { read_manifest(dir / "short.json"); }).find("index 345") != std::string::npos);
    }
    SUBCASE("file absent on disk") {
        fs::remove(dir / "parallel/0017.pfm");
        const std::string msg = message_of([&] { read_manifest(dir / "manifest.json"); });
        CHECK(msg.rfind("MissingFile", 0) == 0);
        CHECK(msg.find("index 17") != std::string::npos);
    }
    SUBCASE("unknown version") {
        std::string t = text;
        t.replace(t.find("\"version\": 1"), 12, "\"version\": 7");
        CHECK(code_of([&] { parse_manifest(t, dir); }) == ErrorCode::UnsupportedVersion);
    }
    SUBCASE("malformed json") {
        CHECK(code_of([&] { parse_manifest("{\"version\": 1,", dir); }) == ErrorCode::ParseError);
        CHECK(code_of([&] { parse_manifest("{\"version\": 1}", dir); }) == ErrorCode::ParseError);
    }
    SUBCASE("image size mismatch") {
        CaptureManifest m = parse_manifest(text, dir);
        m.width = 3;
        write_manifest(dir / "wide.json", m);
        CHECK(code_of([&] { read_manifest(dir / "wide.json"); }) == ErrorCode::DimensionMismatch);
    }
    SUBCASE("direction count mismatch") {
        CaptureManifest m = parse_manifest(text, dir);
        m.rig.generator.clear();
        m.rig.directions.pop_back();
        CHECK(code_of([&] { parse_manifest(dump_manifest(m), dir); }) == ErrorCode::DimensionMismatch);
    }
    SUBCASE("bad solver backend") {
        std::string t = text;
        t.replace(t.find("\"gauss-newton\""), 14, "\"newton-raphson\"");
        CHECK(code_of([&] { parse_manifest(t, dir); }) == ErrorCode::ParseError);
    }
}

TEST_CASE("pipeline stage gating and determinism") {
    const fs::path dir = scratch("pipeline");
    const fs::path manifest = write_capture(dir / "capture", small_capture(96, 6, 6));

    run_pipeline(manifest, Stage::Preprocess, dir / "pre");
    const auto files = tree(dir / "pre");
    CHECK(files.count("visibility_d.pfm") == 1);
    CHECK(files.count("tau_s.pfm") == 1);
    CHECK(files.count("diffuse_sequence.pfm") == 1);
    CHECK(files.count("rho_d_init.pfm") == 0);
    CHECK(files.count("rho_d.pfm") == 0);
    CHECK(files.count("diagnostics.csv") == 0);

    const auto full = run_pipeline(manifest, Stage::Optimize, dir / "full");
    run_pipeline(manifest, Stage::Optimize, dir / "again");
    CHECK(tree(dir / "full") == tree(dir / "again"));
    CHECK(check_bundle(dir / "full").empty());

    // A shorter run into the same directory removes later-stage maps.
    run_pipeline(manifest, Stage::Separate, dir / "again");
    CHECK(tree(dir / "again").count("n_d.pfm") == 0);

    const MaterialBundle back = read_bundle(dir / "full");
    CHECK(back.last_stage == Stage::Optimize);
    CHECK(same_bytes(back.refined->rho_d.values(), full.refined->rho_d.values()));
    CHECK(back.geometry->visibility_s.values() == full.geometry->visibility_s.values());
    CHECK(back.diagnostics.size() == full.diagnostics.size());
    CHECK(back.flags.values() == full.flags.values());
}

TEST_CASE("pipeline composition matches a single run") {
    const fs::path dir = scratch("compose");
    const fs::path manifest = write_capture(dir / "capture", small_capture(96, 6, 6));
    const CaptureManifest m = read_manifest(manifest);
    const PipelineConfig cfg = pipeline_config(m);
    run_pipeline(m, cfg, Stage::Optimize, dir / "single");
    for (Stage split : {Stage::Separate, Stage::Preprocess, Stage::Init}) {
        CAPTURE(to_string(split));
        run_pipeline(m, cfg, split, dir / "a");
        continue_pipeline(m, cfg, dir / "a", Stage::Optimize, dir / "b");
        CHECK(tree(dir / "single") == tree(dir / "b"));
    }
    // two-hop split, written in place
    run_pipeline(m, cfg, Stage::Separate, dir / "c");
    continue_pipeline(m, cfg, dir / "c", Stage::Init, dir / "c");
    continue_pipeline(m, cfg, dir / "c", Stage::Optimize, dir / "c");
    CHECK(tree(dir / "single") == tree(dir / "c"));
}

TEST_CASE("continuing with a different manifest is rejected") {
    const fs::path dir = scratch("mismatch");
    const fs::path a = write_capture(dir / "a", small_capture(32, 4, 4, 1));
    CaptureManifest m = read_manifest(a);
    run_pipeline(m, pipeline_config(m), Stage::Preprocess, dir / "out");
    m.overexposure.epsilon = 0.5;
    CHECK_THROWS_AS(continue_pipeline(m, pipeline_config(m), dir / "out", Stage::Optimize, dir / "out2"), Error);
}

TEST_CASE("stage errors name the stage") {
    PolarizedOLATStack s = small_capture(32, 3, 3);
    s.cross.at(4, 1, 1, 0) = NAN;
    const std::string msg = message_of([&] { process(s, PipelineConfig{}, Stage::Optimize); });
    CHECK(msg.find("stage '") != std::string::npos);
}

TEST_CASE("end-to-end bundle meets the round-trip thresholds") {
    const fs::path dir = scratch("e2e");
    SceneConfig cfg;
    cfg.height = 9;
    cfg.width = 9;
    const SyntheticScene scene = make_scene(cfg);
    const fs::path manifest = write_capture(dir / "capture", render_scene(scene, {}, 5));
    run_pipeline(manifest, Stage::Optimize, dir / "out");
    const MaterialBundle b = read_bundle(dir / "out");
    const auto& r = *b.refined;
    const auto& t = scene.material;
    std::vector<double> err;
    double rho_d = 0.0, rho_s = 0.0, anis = 0.0, rough = 0.0;
    for (std::size_t i = 0; i < r.normal.size(); ++i) {
        err.push_back(angle_degrees(r.normal[i], t.n_d[i]));
        CHECK(angle_degrees(r.n_d[i], t.n_d[i]) < 0.5);
        rho_d = std::max(rho_d, (r.rho_d[i] / t.rho_d[i] - 1.0).abs().maxCoeff());
        if (t.rho_s[i] <= 0.0) continue;
        const auto truth = derive_anisotropy_roughness(t.lobe[i]);
        rho_s = std::max(rho_s, std::abs(r.rho_s[i] / t.rho_s[i] - 1.0));
        anis = std::max(anis, std::abs(r.anisotropy[i] - truth.anisotropy));
        rough = std::max(rough, std::abs(r.roughness[i] / truth.roughness - 1.0));
    }
    std::sort(err.begin(), err.end());
    CHECK(err[err.size() / 2] <= 1.0);
    CHECK(err[static_cast<std::size_t>(0.95 * (err.size() - 1))] <= 3.0);
    CHECK(rho_d <= 0.03);
    CHECK(rho_s <= 0.05);
    CHECK(anis <= 0.05);
    CHECK(rough <= 0.10);
}

TEST_CASE("preview png") {
    const fs::path dir = scratch("preview");
    const PfmImage n{2, 1, 3, {0, 0, 1, 1, 0, 0}};
    const PreviewImage p = make_preview(n, PreviewStyle::Normal);
    CHECK(p.rgb[0] == 128);
    CHECK(p.rgb[2] == 255);
    CHECK(p.rgb[3] == 255);
    write_png(dir / "n.png", p);
    const std::string bytes = slurp(dir / "n.png");
    CHECK(bytes.substr(1, 3) == "PNG");
    const PreviewImage s = make_preview(PfmImage{2, 1, 1, {0.0f, 1.0f}}, PreviewStyle::Scalar);
    CHECK(s.rgb[0] != s.rgb[3]);
}

#ifndef POLARMAT_NO_CLI
TEST_CASE("cli synth is reproducible") {
    const fs::path dir = scratch("cli_synth");
    const std::string common = " --seed 7 --height 6 --width 6 --lights 64 --spike-probability 0.01 --spike-magnitude 4";
    REQUIRE(cli("synth --out " + (dir / "a").string() + common) == 0);
    REQUIRE(cli("synth --out " + (dir / "b").string() + common) == 0);
    CHECK(tree(dir / "a") == tree(dir / "b"));
}

TEST_CASE("cli preprocess then fit equals run") {
    const fs::path dir = scratch("cli_compose");
    REQUIRE(cli("synth --out " + (dir / "cap").string() + " --seed 3 --height 6 --width 6 --lights 96") == 0);
    const std::string m = " --manifest " + (dir / "cap").string();
    REQUIRE(cli("run" + m + " --out " + (dir / "full").string() + " --threads 2") == 0);
    REQUIRE(cli("run" + m + " --stages preprocess --out " + (dir / "dump").string()) == 0);
    REQUIRE(cli("fit" + m + " --from " + (dir / "dump").string() + " --out " + (dir / "fit").string()) == 0);
    CHECK(tree(dir / "full") == tree(dir / "fit"));
}

TEST_CASE("cli inspect reports normal statistics") {
    const fs::path dir = scratch("cli_inspect");
    write_pfm(dir / "n.pfm", PfmImage{2, 1, 3, {0, 0, 1, 0.6f, 0, 0.6f}});
    const std::string out = cli_output("inspect " + (dir / "n.pfm").string() + " --style normal --png " +
                                       (dir / "n.png").string());
    CHECK(out.find("min") != std::string::npos);
    CHECK(out.find("mean") != std::string::npos);
    CHECK(out.find("unit-norm violations: 1") != std::string::npos);
    CHECK(fs::exists(dir / "n.png"));
}

TEST_CASE("cli errors") {
    const fs::path dir = scratch("cli_err");
    CHECK(cli("") != 0);
    CHECK(cli("run --manifest " + (dir / "none").string() + " --out " + (dir / "o").string()) != 0);
    CHECK(cli("bogus") != 0);
    REQUIRE(cli("synth --out " + (dir / "cap").string() + " --height 4 --width 4 --lights 32") == 0);
    CHECK(cli("run --manifest " + (dir / "cap").string() + " --out " + (dir / "o").string() +
              " --solver sigma=newton") != 0);
    CHECK(cli("run --manifest " + (dir / "cap").string() + " --out " + (dir / "o").string() +
              " --solver sigma=ncg --stages preprocess,init") == 0);
    {
        std::ofstream bad(dir / "cap" / "manifest.json");
        bad << "{ not json";
    }
    const std::string out = cli_output("run --manifest " + (dir / "cap").string() + " --out " + (dir / "o").string());
    CHECK(out.find("ParseError") != std::string::npos);
}
#endif
