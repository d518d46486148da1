// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "polarmat/objectives.hpp"
#include "polarmat/optimize.hpp"
#include "polarmat/preprocess.hpp"

using namespace polarmat;

namespace {

constexpr Backend kBackends[] = {Backend::LbfgsBacktracking, Backend::LbfgsZoom,    Backend::LbfgsHagerZhang,
                                 Backend::GradientDescent,   Backend::NonlinearCG, Backend::GaussNewton};

SolverConfig with(Backend b, int iterations = 500) {
    SolverConfig c;
    c.backend = b;
    c.max_iterations = iterations;
    return c;
}

// Rosenbrock as least squares: r = (10 (y - x^2), 1 - x).
class Rosenbrock final : public Objective {
public:
    int dimension() const override { return 2; }
    double value(const VecX& x) const override {
        VecX r;
        residuals(x, r, nullptr);
        return 0.5 * r.squaredNorm();
    }
    double value_and_gradient(const VecX& x, VecX& g) const override {
        VecX r;
        MatX j;
        residuals(x, r, &j);
        g = j.transpose() * r;
        return 0.5 * r.squaredNorm();
    }
    bool has_residuals() const override { return true; }
    void residuals(const VecX& x, VecX& r, MatX* j) const override {
        r.resize(2);
        r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        if (j) {
            j->resize(2, 2);
            *j << -20.0 * x[0], 10.0, -1.0, 0.0;
        }
    }
};

class Quadratic final : public Objective {
public:
    int dimension() const override { return 3; }
    double value(const VecX& x) const override { return 0.5 * (x - target()).squaredNorm(); }
    double value_and_gradient(const VecX& x, VecX& g) const override {
        g = x - target();
        return value(x);
    }
    static VecX target() { return Eigen::Vector3d(1.0, -2.0, 0.5); }
};

struct Rendered {
    LightRig rig;
    std::vector<Rgb> diffuse;
    std::vector<Rgb> specular;
};

Rendered render(const Rgb& rho_d, double rho_s, const Vec3& n, const WardLobe& lobe, const Vec3& wo = Vec3::UnitZ(),
                int lights = 346) {
    Rendered out{LightRig::spiral(lights), {}, {}};
    const auto stack =
        render_olat(GroundTruthMaterial::uniform(1, 1, rho_d, rho_s, n, lobe), out.rig, wo, {}, 0);
    const auto sep = separate_stack(stack);
    out.diffuse = sep.diffuse.pixel(0, 0);
    out.specular = sep.specular.pixel(0, 0);
    return out;
}

double relative_gradient_error(const Objective& obj, const VecX& x) {
    VecX g;
    obj.value_and_gradient(x, g);
    VecX fd(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        VecX a = x, b = x;
        a[i] += h;
        b[i] -= h;
        fd[i] = (obj.value(a) - obj.value(b)) / (2 * h);
    }
    return (g - fd).norm() / std::max({g.norm(), fd.norm(), 1e-6});
}

}  // namespace

TEST_CASE("backend and kind names round trip") {
    for (Backend b : kBackends) CHECK(parse_backend(to_string(b)) == b);
    for (ProblemKind k : kAllProblemKinds) CHECK(parse_problem_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_backend("newton"), Error);
    CHECK_THROWS_AS(parse_problem_kind("roughness"), Error);
}

TEST_CASE("every backend solves Rosenbrock") {
    const Rosenbrock f;
    for (Backend b : kBackends) {
        CAPTURE(to_string(b));
        const auto r = minimize(f, Eigen::Vector2d(-1.2, 1.0), with(b, b == Backend::GradientDescent ? 20000 : 500));
        CHECK((r.x - Eigen::Vector2d(1.0, 1.0)).norm() < (b == Backend::GradientDescent ? 1e-3 : 1e-6));
    }
}

TEST_CASE("quadratic converges and reports it") {
    const Quadratic f;
    for (Backend b : {Backend::LbfgsZoom, Backend::LbfgsHagerZhang, Backend::NonlinearCG, Backend::LbfgsBacktracking}) {
        const auto r = minimize(f, VecX::Zero(3), with(b));
        CHECK(r.status == SolveStatus::Converged);
        CHECK((r.x - Quadratic::target()).norm() < 1e-9);
    }
}

TEST_CASE("steps respect the length limit") {
    const Quadratic q;
    for (Backend b : kBackends) {
        if (b == Backend::GaussNewton) continue;
        CAPTURE(to_string(b));
        SolverConfig c = with(b, 1);
        c.line_search.max_step_length = 0.5;
        const VecX x0 = Eigen::Vector3d(40.0, 0.0, 0.0);
        const SolveResult r = minimize(q, x0, c);
        CHECK((r.x - x0).norm() <= 0.5 + 1e-12);
        CHECK(r.value < q.value(x0));
    }
    Rosenbrock rb;
    SolverConfig c = with(Backend::GaussNewton, 1);
    c.line_search.max_step_length = 0.25;
    const VecX x0 = Eigen::Vector2d(-3.0, 4.0);
    CHECK((minimize(rb, x0, c).x - x0).norm() <= 0.25 + 1e-12);
}

TEST_CASE("gauss-newton needs residuals") {
    const Quadratic f;
    CHECK_THROWS_AS(minimize(f, VecX::Zero(3), with(Backend::GaussNewton)), Error);
}

TEST_CASE("solver config validation") {
    SolverConfig c;
    c.max_iterations = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.gradient_tolerance = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("problems exclude samples behind the normal") {
    const Vec3 n = Vec3(0.3, 0.2, 0.9).normalized();
    const auto px = render(Rgb::Constant(0.5), 0.4, n, {0.2, 0.2});
    for (ProblemKind k : kAllProblemKinds) {
        const auto p = make_problem(k, k == ProblemKind::DiffuseNormal || k == ProblemKind::DiffuseAlbedo ? px.diffuse
                                                                                                          : px.specular,
                                    Rgb::Zero(), px.rig, Vec3::UnitZ(), n);
        for (const auto& d : p.directions) CHECK(d.dot(n) > 0.0);
    }
}

TEST_CASE("objective gradients match central differences") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (ProblemKind k : kAllProblemKinds) {
        CAPTURE(to_string(k));
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const Vec3 n = Vec3(0.3 * u(rng), 0.3 * u(rng), 1.0).normalized();
            const WardLobe lobe{0.15 + 0.1 * u(rng), 0.2 + 0.1 * u(rng)};
            const auto px = render(Rgb(0.5, 0.4, 0.3), 0.5, n, lobe, Vec3::UnitZ(), 200);
            const bool diffuse = k == ProblemKind::DiffuseNormal || k == ProblemKind::DiffuseAlbedo;
            PixelProblem p = make_problem(k, diffuse ? px.diffuse : px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(),
                                          (n + Vec3(0.05 * u(rng), 0.05 * u(rng), 0.0)).normalized());
            p.lobe = lobe;
            const auto obj = make_objective(p);
            VecX x = start_point(p);
            for (int i = 0; i < x.size(); ++i) x[i] += k == ProblemKind::Sigma ? 0.5 * u(rng) : 0.1 * u(rng);
            worst = std::max(worst, relative_gradient_error(*obj, x));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("residual jacobians match the gradient") {
    const auto px = render(Rgb(0.5, 0.4, 0.3), 0.5, Vec3::UnitZ(), {0.1, 0.2}, Vec3::UnitZ(), 200);
    for (ProblemKind k : {ProblemKind::Sigma, ProblemKind::DiffuseAlbedo, ProblemKind::SpecularAlbedo}) {
        const bool diffuse = k == ProblemKind::DiffuseAlbedo;
        PixelProblem p =
            make_problem(k, diffuse ? px.diffuse : px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), Vec3::UnitZ());
        p.lobe = {0.12, 0.18};
        const auto obj = make_objective(p);
        REQUIRE(obj->has_residuals());
        const VecX x = start_point(p).array() + 0.1;
        VecX r, g;
        MatX j;
        obj->residuals(x, r, &j);
        const double v = obj->value_and_gradient(x, g);
        CHECK(v == doctest::Approx(0.5 * r.squaredNorm()).epsilon(1e-12));
        CHECK((j.transpose() * r - g).norm() <= 1e-10 * std::max(1.0, g.norm()));
    }
}

TEST_CASE("diffuse normal refinement") {
    const SolverConfig cfg = SolverSet::defaults()[ProblemKind::DiffuseNormal];
    SUBCASE("noiseless render") {
        const Vec3 n(0.36, 0.48, 0.80);
        const auto px = render(Rgb(0.5, 0.4, 0.3), 0.0, n, {0.1, 0.1});
        const Vec3 start = (n + Vec3(0.05, -0.04, 0.02)).normalized();
        const auto p = make_problem(ProblemKind::DiffuseNormal, px.diffuse, Rgb::Zero(), px.rig, Vec3::UnitZ(), start);
        const auto fit = refine_diffuse_normal(p, start, cfg);
        CHECK(angle_degrees(fit.normal, n) < 0.5);
        CHECK(fit.correlation > 0.999);
    }
    SUBCASE("optimum at the start") {
        const LightRig rig = LightRig::spiral(346);
        const Vec3 n = Vec3(-0.2, 0.1, 0.97).normalized();
        std::vector<Rgb> obs(346);
        for (int k = 0; k < 346; ++k) obs[k] = Rgb::Constant(0.7 * std::max(n.dot(rig.directions[k]), 0.0));
        const auto p = make_problem(ProblemKind::DiffuseNormal, obs, Rgb::Zero(), rig, Vec3::UnitZ(), n);
        const auto fit = refine_diffuse_normal(p, n, cfg);
        CHECK(std::abs(fit.correlation - 1.0) < 1e-6);
        CHECK(angle_degrees(fit.normal, n) < 1e-6);
    }
    SUBCASE("scale invariance") {
        const Vec3 n = Vec3(0.2, -0.3, 0.9).normalized();
        const auto px = render(Rgb(0.5, 0.4, 0.3), 0.0, n, {0.1, 0.1});
        const Vec3 start = (n + Vec3(0.1, 0.0, 0.0)).normalized();
        const auto p = make_problem(ProblemKind::DiffuseNormal, px.diffuse, Rgb::Zero(), px.rig, Vec3::UnitZ(), start);
        const auto base = refine_diffuse_normal(p, start, cfg);
        for (double a : {2.0, 0.37, 11.0}) {
            PixelProblem q = p;
            for (auto& o : q.observations) o *= a;
            const auto fit = refine_diffuse_normal(q, start, cfg);
            CHECK(angle_degrees(fit.normal, base.normal) < 1e-6);
        }
    }
}

TEST_CASE("specular normal refinement") {
    const SolverConfig cfg = SolverSet::defaults()[ProblemKind::SpecularNormal];
    const auto px = render(Rgb::Zero(), 0.6, Vec3::UnitZ(), {0.05, 0.05});
    const Vec3 start = Vec3(0.03, 0.02, 1.0).normalized();
    SUBCASE("sharp lobe") {
        const auto p = make_problem(ProblemKind::SpecularNormal, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), start);
        CHECK(angle_degrees(refine_specular_normal(p, start, cfg).normal, Vec3::UnitZ()) < 1.0);
    }
    SUBCASE("solver reaches the correlation maximum") {
        const auto p = make_problem(ProblemKind::SpecularNormal, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), start);
        const NormalObjective obj(p, Vec3::UnitZ());
        double best = -1.0;
        for (double a = -0.1; a <= 0.1; a += 0.001)
            for (double b = -0.1; b <= 0.1; b += 0.001) best = std::max(best, obj.correlation(Vec3(a, b, 1.0).normalized()));
        CHECK(refine_specular_normal(p, start, cfg).correlation >= best - 1e-9);
    }
    SUBCASE("light order does not matter") {
        std::vector<int> perm(346);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
        LightRig rig = px.rig;
        std::vector<Rgb> spec(346);
        for (int k = 0; k < 346; ++k) {
            rig.directions[k] = px.rig.directions[perm[k]];
            spec[k] = px.specular[perm[k]];
        }
        const auto a = refine_specular_normal(
            make_problem(ProblemKind::SpecularNormal, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), start), start, cfg);
        const auto b = refine_specular_normal(
            make_problem(ProblemKind::SpecularNormal, spec, Rgb::Zero(), rig, Vec3::UnitZ(), start), start, cfg);
        CHECK(angle_degrees(a.normal, b.normal) < 1e-6);
    }
    SUBCASE("dark signal is under-determined") {
        const std::vector<Rgb> dark(346, Rgb::Zero());
        const auto p = make_problem(ProblemKind::SpecularNormal, dark, Rgb::Zero(), px.rig, Vec3::UnitZ(), start);
        CHECK(solve_problem(p, cfg).diag.status == SolveStatus::Underdetermined);
    }
}

TEST_CASE("normal fusion") {
    const Vec3 a = Vec3(0.1, 0.0, 1.0).normalized(), b = Vec3(-0.1, 0.2, 1.0).normalized();
    CHECK((fuse_normals(a, b, 1.0, 0.0) - a).norm() < 1e-15);
    CHECK((fuse_normals(a, a, 0.7, 0.7) - a).norm() < 1e-15);
    const Vec3 f = fuse_normals(a, b, 0.5, 0.5);
    CHECK(std::abs(f.norm() - 1.0) < 1e-12);
    CHECK(angle_degrees(f, a) == doctest::Approx(angle_degrees(f, b)));
}

TEST_CASE("fusion helps a dark diffuse pixel") {
    const Vec3 n = Vec3(0.2, 0.1, 0.95).normalized();
    auto px = render(Rgb::Constant(0.01), 0.5, n, {0.15, 0.15});
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 0.002);
    for (auto& v : px.diffuse) v = (v + Rgb(g(rng), g(rng), g(rng))).max(0.0);
    const SolverSet s = SolverSet::defaults();
    const auto pd = make_problem(ProblemKind::DiffuseNormal, px.diffuse, Rgb::Zero(), px.rig, Vec3::UnitZ(), n);
    const auto ps = make_problem(ProblemKind::SpecularNormal, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), n);
    const auto fd = refine_diffuse_normal(pd, n, s[ProblemKind::DiffuseNormal]);
    const auto fs = refine_specular_normal(ps, n, s[ProblemKind::SpecularNormal]);
    const Vec3 fused = fuse_normals(fd.normal, fs.normal, fd.correlation, fs.correlation);
    const double ed = angle_degrees(fd.normal, n), es = angle_degrees(fs.normal, n);
    CHECK(angle_degrees(fused, n) <= std::min(ed, es) + 1.0);
}

TEST_CASE("sigma fit") {
    const SolverConfig cfg = SolverSet::defaults()[ProblemKind::Sigma];
    SUBCASE("isotropic") {
        const auto px = render(Rgb::Zero(), 0.5, Vec3::UnitZ(), {0.1, 0.1});
        const auto p = make_problem(ProblemKind::Sigma, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), Vec3::UnitZ());
        const auto fit = fit_sigma(p, shading_frame(Vec3::UnitZ()), cfg, {0.2, 0.2});
        CHECK(std::abs(fit.lobe.sigma_x / 0.1 - 1.0) < 0.05);
        CHECK(std::abs(fit.lobe.sigma_y / 0.1 - 1.0) < 0.05);
    }
    SUBCASE("anisotropic") {
        const auto px = render(Rgb::Zero(), 0.5, Vec3::UnitZ(), {0.05, 0.3});
        const auto p = make_problem(ProblemKind::Sigma, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), Vec3::UnitZ());
        const auto fit = fit_sigma(p, shading_frame(Vec3::UnitZ()), cfg, {0.2, 0.2});
        const double truth = derive_anisotropy_roughness({0.05, 0.3}).anisotropy;
        CHECK(truth == doctest::Approx(-0.25 / 0.35));
        const double got = derive_anisotropy_roughness(fit.lobe).anisotropy;
        CHECK(got * truth > 0.0);
        CHECK(std::abs(std::abs(got) - std::abs(truth)) < 0.1);
    }
    SUBCASE("realizable observations") {
        const LightRig rig = LightRig::spiral(346);
        const WardLobe lobe{0.12, 0.2};
        const ShadingFrame f = shading_frame(Vec3::UnitZ());
        std::vector<Rgb> obs(346);
        for (int k = 0; k < 346; ++k) obs[k] = Rgb::Constant(ward_value(rig.directions[k], Vec3::UnitZ(), lobe, f));
        const auto p = make_problem(ProblemKind::Sigma, obs, Rgb::Zero(), rig, Vec3::UnitZ(), Vec3::UnitZ());
        const auto fit = fit_sigma(p, f, cfg, {0.3, 0.3});
        CHECK(std::sqrt(2.0 * fit.diag.value) < 1e-8);
        CHECK(fit.lobe.sigma_x == doctest::Approx(0.12).epsilon(1e-6));
    }
    SUBCASE("positivity and scale invariance") {
        const auto px = render(Rgb::Zero(), 0.5, Vec3::UnitZ(), {0.08, 0.15});
        const auto p = make_problem(ProblemKind::Sigma, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), Vec3::UnitZ());
        const auto a = fit_sigma(p, p.frame, cfg, {0.4, 0.4});
        PixelProblem q = p;
        for (auto& o : q.observations) o *= 5.0;
        const auto b = fit_sigma(q, q.frame, cfg, {0.4, 0.4});
        CHECK(a.lobe.sigma_x > 0.0);
        CHECK(a.lobe.sigma_y > 0.0);
        CHECK(a.lobe.sigma_x == doctest::Approx(b.lobe.sigma_x).epsilon(1e-9));
        CHECK(a.lobe.sigma_y == doctest::Approx(b.lobe.sigma_y).epsilon(1e-9));
    }
}

TEST_CASE("anisotropy and roughness") {
    auto ar = derive_anisotropy_roughness({0.1, 0.1});
    CHECK(ar.anisotropy == 0.0);
    CHECK(ar.roughness == doctest::Approx(0.02));
    ar = derive_anisotropy_roughness({0.3, 0.1});
    CHECK(ar.anisotropy == doctest::Approx(0.5));
    CHECK(ar.roughness == doctest::Approx(0.10));
    const auto sw = derive_anisotropy_roughness({0.1, 0.3});
    CHECK(sw.anisotropy == doctest::Approx(-0.5));
    CHECK(sw.roughness == ar.roughness);
}

TEST_CASE("albedo refinement") {
    const SolverConfig cfg = SolverSet::defaults()[ProblemKind::DiffuseAlbedo];
    SUBCASE("exact least squares") {
        const LightRig rig = LightRig::spiral(100);
        const Vec3 n = Vec3::UnitZ();
        std::vector<Rgb> obs(100);
        for (int k = 0; k < 100; ++k)
            obs[k] = Rgb::Constant(0.7 * rig.l0 * rig.a0 * std::max(n.dot(rig.directions[k]), 0.0));
        const auto p = make_problem(ProblemKind::DiffuseAlbedo, obs, Rgb::Zero(), rig, Vec3::UnitZ(), n);
        const auto fit = refine_albedo(p, n, std::nullopt, cfg);
        CHECK(std::abs(fit.albedo[0] - 0.7) < 1e-10);
        const AlbedoObjective obj(p);
        CHECK(std::abs(obj.closed_form()[1] - 0.7) < 1e-12);
    }
    SUBCASE("rendered diffuse albedo") {
        const Vec3 n = Vec3(0.1, -0.2, 0.97).normalized();
        const auto px = render(Rgb(0.8, 0.4, 0.2), 0.0, n, {0.1, 0.1});
        const auto p = make_problem(ProblemKind::DiffuseAlbedo, px.diffuse, Rgb::Zero(), px.rig, Vec3::UnitZ(), n);
        const Rgb rho = refine_albedo(p, n, std::nullopt, cfg).albedo;
        CHECK(std::abs(rho[0] / 0.8 - 1.0) < 0.03);
        CHECK(std::abs(rho[1] / 0.4 - 1.0) < 0.03);
        CHECK(std::abs(rho[2] / 0.2 - 1.0) < 0.03);
    }
    SUBCASE("gauss-newton agrees with the closed form") {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const LightRig rig = LightRig::spiral(120);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const bool spec = t % 2;
            std::vector<Rgb> obs(120);
            for (auto& o : obs) o = Rgb(u(rng), u(rng), u(rng));
            const Vec3 n = Vec3(u(rng) - 0.5, u(rng) - 0.5, 1.0).normalized();
            PixelProblem p = make_problem(spec ? ProblemKind::SpecularAlbedo : ProblemKind::DiffuseAlbedo, obs,
                                          Rgb::Zero(), rig, Vec3::UnitZ(), n);
            p.lobe = {0.1 + 0.3 * u(rng), 0.1 + 0.3 * u(rng)};
            const VecX closed = AlbedoObjective(p).closed_form();
            const auto fit = refine_albedo(p, n, spec ? std::optional<WardLobe>(p.lobe) : std::nullopt,
                                           with(Backend::GaussNewton));
            for (int c = 0; c < closed.size(); ++c)
                if (closed[c] > 0.0) worst = std::max(worst, std::abs(fit.albedo[c] / closed[c] - 1.0));
        }
        CHECK(worst < 1e-6);
    }
    SUBCASE("negative estimates are clamped") {
        const LightRig rig = LightRig::spiral(50);
        std::vector<Rgb> obs(50, Rgb::Zero());
        const Vec3 n = Vec3::UnitZ();
        const auto p = make_problem(ProblemKind::DiffuseAlbedo, obs, Rgb::Zero(), rig, Vec3::UnitZ(), n);
        PixelProblem q = p;
        for (std::size_t k = 0; k < q.observations.size(); ++k) q.observations[k] = Rgb::Constant(-0.1);
        const auto fit = refine_albedo(q, n, std::nullopt, cfg);
        CHECK(fit.clamped);
        CHECK(fit.albedo.minCoeff() == 0.0);
    }
}

TEST_CASE("batch solving") {
    const SolverConfig cfg = SolverSet::defaults()[ProblemKind::Sigma];
    SUBCASE("empty") {
        const auto r = solve_batch({}, cfg, 4);
        CHECK(r.solutions.empty());
        CHECK(r.diagnostics.empty());
    }
    SUBCASE("identical problems give identical results") {
        const auto px = render(Rgb::Zero(), 0.5, Vec3::UnitZ(), {0.1, 0.2}, Vec3::UnitZ(), 64);
        PixelProblem p = make_problem(ProblemKind::Sigma, px.specular, Rgb::Zero(), px.rig, Vec3::UnitZ(), Vec3::UnitZ());
        p.lobe = {0.2, 0.2};
        const std::vector<PixelProblem> problems(10000, p);
        const auto r = solve_batch(problems, cfg, 3);
        REQUIRE(r.solutions.size() == 10000);
        for (const auto& s : r.solutions) {
            CHECK(s.lobe.sigma_x == r.solutions[0].lobe.sigma_x);
            CHECK(s.lobe.sigma_y == r.solutions[0].lobe.sigma_y);
        }
        std::ostringstream csv;
        write_diagnostics_csv(csv, std::span(r.diagnostics).first(2));
        const std::string text = csv.str();
        CHECK(text.rfind("pixel,kind,backend,iterations,grad_norm,status\n0,sigma,gauss-newton,", 0) == 0);
    }
}
