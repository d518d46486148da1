// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#include "polarmat/solvers.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "polarmat/error.hpp"

namespace polarmat {

void Objective::residuals(const VecX&, VecX&, MatX*) const {
    throw Error(ErrorCode::UnsupportedBackend, "objective has no residual form");
}

std::string_view to_string(Backend b) {
    switch (b) {
        case Backend::LbfgsBacktracking: return "lbfgs-backtracking";
        case Backend::LbfgsZoom: return "lbfgs-zoom";
        case Backend::LbfgsHagerZhang: return "lbfgs-hager-zhang";
        case Backend::GradientDescent: return "gd";
        case Backend::NonlinearCG: return "ncg";
        case Backend::GaussNewton: return "gauss-newton";
    }
    return "unknown";
}

Backend parse_backend(std::string_view name) {
    for (Backend b : {Backend::LbfgsBacktracking, Backend::LbfgsZoom, Backend::LbfgsHagerZhang,
                      Backend::GradientDescent, Backend::NonlinearCG, Backend::GaussNewton})
        if (to_string(b) == name) return b;
    throw Error(ErrorCode::InvalidArgument, "unknown solver backend '" + std::string(name) + "'");
}

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max-iterations";
        case SolveStatus::LineSearchFailure: return "line-search-failure";
        case SolveStatus::Underdetermined: return "underdetermined";
        case SolveStatus::Degenerate: return "degenerate";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
    if (!(gradient_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "gradient_tolerance must be positive");
    if (history < 1) throw Error(ErrorCode::InvalidArgument, "L-BFGS history must be at least 1");
    const auto& ls = line_search;
    if (!(ls.c1 > 0.0 && ls.c1 < ls.c2 && ls.c2 < 1.0))
        throw Error(ErrorCode::InvalidArgument, "line search needs 0 < c1 < c2 < 1");
    if (!(ls.decrease_factor > 0.0 && ls.decrease_factor < 1.0) || ls.max_steps < 1)
        throw Error(ErrorCode::InvalidArgument, "invalid backtracking parameters");
    if (!(ls.max_step_length > 0.0))
        throw Error(ErrorCode::InvalidArgument, "line search needs a positive max_step_length");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Probe {
    double alpha = 0.0;
    double f = 0.0;
    double df = 0.0;  // directional derivative
    VecX g;
};

class LineFunction {
public:
    LineFunction(const Objective& obj, const VecX& x, const VecX& d, int& evals, double max_length)
        : obj_(obj), x_(x), d_(d), evals_(evals), max_alpha_(max_length / std::max(d.norm(), 1e-300)) {}

    double max_alpha() const { return max_alpha_; }

    Probe at(double alpha) const {
        Probe p;
        p.alpha = alpha;
        p.f = obj_.value_and_gradient(x_ + alpha * d_, p.g);
        ++evals_;
        p.df = p.g.dot(d_);
        if (!std::isfinite(p.f) || !std::isfinite(p.df)) {
            p.f = kInf;
            p.df = kInf;
        }
        return p;
    }

private:
    const Objective& obj_;
    const VecX& x_;
    const VecX& d_;
    int& evals_;
    double max_alpha_;
};

std::optional<Probe> backtracking(const LineFunction& phi, const Probe& p0, double alpha, const LineSearchParams& ls) {
    alpha = std::min(alpha, phi.max_alpha());
    for (int i = 0; i < ls.max_steps; ++i) {
        Probe p = phi.at(alpha);
        if (p.f <= p0.f + ls.c1 * alpha * p0.df) return p;
        alpha *= ls.decrease_factor;
    }
    return std::nullopt;
}

double cubic_step(const Probe& a, const Probe& b) {
    const double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
    const double mid = 0.5 * (lo + hi);
    if (!std::isfinite(b.f) || !std::isfinite(a.f)) return mid;
    const double d1 = a.df + b.df - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.df * b.df;
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.df - a.df + 2.0 * d2;
    if (denom == 0.0) return mid;
    const double c = b.alpha - (b.alpha - a.alpha) * (b.df + d2 - d1) / denom;
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(c) || c < lo + margin || c > hi - margin) return mid;
    return c;
}

// Strong Wolfe bracketing and zoom. Bracketing grows the step up to the
// length limit and accepts it there once it gives sufficient decrease.
std::optional<Probe> zoom_search(const LineFunction& phi, const Probe& p0, double alpha, const LineSearchParams& ls) {
    const double alpha_max = phi.max_alpha();
    alpha = std::min(alpha, alpha_max);
    auto armijo = [&](const Probe& p) { return p.f <= p0.f + ls.c1 * p.alpha * p0.df; };
    auto curvature = [&](const Probe& p) { return std::abs(p.df) <= -ls.c2 * p0.df; };

    auto zoom = [&](Probe lo, Probe hi) -> std::optional<Probe> {
        for (int j = 0; j < ls.max_steps; ++j) {
            if (std::abs(hi.alpha - lo.alpha) <= 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
            Probe p = phi.at(cubic_step(lo, hi));
            if (!armijo(p) || p.f >= lo.f) {
                hi = std::move(p);
            } else {
                if (curvature(p)) return p;
                if (p.df * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(p);
            }
        }
        if (lo.alpha > 0.0 && lo.f < p0.f) return lo;
        return std::nullopt;
    };

    Probe prev = p0;
    for (int i = 0; i < ls.max_steps; ++i) {
        Probe p = phi.at(alpha);
        if (!armijo(p) || (i > 0 && p.f >= prev.f)) return zoom(prev, p);
        if (curvature(p)) return p;
        if (p.df >= 0.0) return zoom(p, prev);
        if (alpha >= alpha_max) return p;
        prev = std::move(p);
        alpha = std::min(2.0 * alpha, alpha_max);
    }
    return std::nullopt;
}

// Approximate Wolfe line search with secant^2 bracketing.
std::optional<Probe> hager_zhang(const LineFunction& phi, const Probe& p0, double alpha, const LineSearchParams& ls) {
    const double delta = 0.1, sigma = ls.c2, theta = 0.5, gamma = 0.66, grow = 5.0;
    const double eps = 1e-6 * std::abs(p0.f);
    const int budget = 3 * ls.max_steps;
    int used = 0;
    auto probe = [&](double a) {
        ++used;
        return phi.at(a);
    };
    auto wolfe = [&](const Probe& p) {
        if (!(p.df >= sigma * p0.df) || !std::isfinite(p.f)) return false;
        if (p.f <= p0.f + delta * p.alpha * p0.df) return true;
        return p.f <= p0.f + eps && p.df <= (2.0 * delta - 1.0) * p0.df;
    };
    auto update3 = [&](Probe a, Probe b) -> std::pair<Probe, Probe> {
        while (used < budget) {
            Probe d = probe((1.0 - theta) * a.alpha + theta * b.alpha);
            if (d.df >= 0.0) return {a, d};
            if (d.f <= p0.f + eps)
                a = std::move(d);
            else
                b = std::move(d);
        }
        return {a, b};
    };
    auto update = [&](const Probe& a, const Probe& b, const Probe& c) -> std::pair<Probe, Probe> {
        if (!(c.alpha > a.alpha && c.alpha < b.alpha)) return {a, b};
        if (c.df >= 0.0) return {a, c};
        if (c.f <= p0.f + eps) return {c, b};
        return update3(a, c);
    };
    auto secant = [](const Probe& a, const Probe& b) {
        return (a.alpha * b.df - b.alpha * a.df) / (b.df - a.df);
    };

    const double alpha_max = phi.max_alpha();
    Probe c = probe(std::min(alpha, alpha_max));
    if (wolfe(c)) return c;

    // Bracket.
    Probe a = p0, b;
    for (;;) {
        if (c.df >= 0.0) {
            b = std::move(c);
            break;
        }
        if (c.f > p0.f + eps) {
            std::tie(a, b) = update3(p0, c);
            break;
        }
        if (c.alpha >= alpha_max && c.f < p0.f) return c;
        a = c;
        if (used >= budget) return a.alpha > 0.0 && a.f < p0.f ? std::optional<Probe>(a) : std::nullopt;
        c = probe(std::min(c.alpha * grow, alpha_max));
        if (wolfe(c)) return c;
    }

    while (used < budget) {
        if (wolfe(a) && a.alpha > 0.0) return a;
        if (wolfe(b)) return b;
        const double width = b.alpha - a.alpha;
        if (width <= 1e-14 * std::max(1.0, b.alpha)) break;

        // secant^2
        Probe A = a, B = b;
        const double cs = secant(a, b);
        if (std::isfinite(cs)) {
            Probe C = probe(cs);
            if (wolfe(C)) return C;
            std::tie(A, B) = update(a, b, C);
            std::optional<double> cbar;
            if (C.alpha == B.alpha) cbar = secant(b, B);
            if (C.alpha == A.alpha) cbar = secant(a, A);
            if (cbar && std::isfinite(*cbar) && *cbar > A.alpha && *cbar < B.alpha && used < budget) {
                Probe Cb = probe(*cbar);
                if (wolfe(Cb)) return Cb;
                std::tie(A, B) = update(A, B, Cb);
            }
        }
        if (B.alpha - A.alpha > gamma * width && used < budget) {
            Probe mid = probe(0.5 * (A.alpha + B.alpha));
            if (wolfe(mid)) return mid;
            std::tie(A, B) = update(A, B, mid);
        }
        a = std::move(A);
        b = std::move(B);
    }
    if (a.alpha > 0.0 && a.f < p0.f) return a;
    return std::nullopt;
}

SolveResult finish(VecX x, double f, const VecX& g, int iterations, int evals, SolveStatus status, double tol) {
    SolveResult r;
    r.x = std::move(x);
    r.value = f;
    r.gradient_norm = g.norm();
    r.iterations = iterations;
    r.evaluations = evals;
    r.status = r.gradient_norm <= tol ? SolveStatus::Converged : status;
    return r;
}

SolveResult run_lbfgs(const Objective& obj, const VecX& x0, const SolverConfig& cfg) {
    int evals = 1;
    VecX x = x0, g;
    double f = obj.value_and_gradient(x, g);
    std::deque<std::pair<VecX, VecX>> memory;
    int it = 0;
    SolveStatus status = SolveStatus::MaxIterations;
    for (; it < cfg.max_iterations; ++it) {
        if (g.norm() <= cfg.gradient_tolerance) {
            status = SolveStatus::Converged;
            break;
        }
        // Two-loop recursion.
        VecX q = -g;
        std::vector<double> alphas(memory.size());
        for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = memory[i];
            alphas[i] = s.dot(q) / y.dot(s);
            q -= alphas[i] * y;
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            q *= s.dot(y) / y.dot(y);
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const auto& [s, y] = memory[i];
            const double beta = y.dot(q) / y.dot(s);
            q += (alphas[i] - beta) * s;
        }
        VecX d = q;
        if (!(d.dot(g) < 0.0)) {
            d = -g;
            memory.clear();
        }
        const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
        const LineFunction phi(obj, x, d, evals, cfg.line_search.max_step_length);
        const Probe p0{0.0, f, g.dot(d), g};
        std::optional<Probe> p;
        switch (cfg.backend) {
            case Backend::LbfgsBacktracking: p = backtracking(phi, p0, alpha0, cfg.line_search); break;
            case Backend::LbfgsHagerZhang: p = hager_zhang(phi, p0, alpha0, cfg.line_search); break;
            default: p = zoom_search(phi, p0, alpha0, cfg.line_search); break;
        }
        if (!p) {
            status = SolveStatus::LineSearchFailure;
            break;
        }
        VecX s = p->alpha * d;
        VecX y = p->g - g;
        x += s;
        f = p->f;
        g = p->g;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            memory.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(memory.size()) > cfg.history) memory.pop_front();
        }
    }
    return finish(std::move(x), f, g, it, evals, status, cfg.gradient_tolerance);
}

SolveResult run_gd(const Objective& obj, const VecX& x0, const SolverConfig& cfg) {
    int evals = 1;
    VecX x = x0, g;
    double f = obj.value_and_gradient(x, g);
    double step = std::min(1.0, 1.0 / std::max(g.norm(), 1e-300));
    int it = 0;
    SolveStatus status = SolveStatus::MaxIterations;
    for (; it < cfg.max_iterations; ++it) {
        if (g.norm() <= cfg.gradient_tolerance) {
            status = SolveStatus::Converged;
            break;
        }
        const VecX d = -g;
        const LineFunction phi(obj, x, d, evals, cfg.line_search.max_step_length);
        const auto p = backtracking(phi, Probe{0.0, f, g.dot(d), g}, step / cfg.line_search.decrease_factor,
                                    cfg.line_search);
        if (!p) {
            status = SolveStatus::LineSearchFailure;
            break;
        }
        step = p->alpha;
        x += step * d;
        f = p->f;
        g = p->g;
    }
    return finish(std::move(x), f, g, it, evals, status, cfg.gradient_tolerance);
}

SolveResult run_ncg(const Objective& obj, const VecX& x0, const SolverConfig& cfg) {
    int evals = 1;
    VecX x = x0, g;
    double f = obj.value_and_gradient(x, g);
    VecX d = -g;
    double alpha0 = std::min(1.0, 1.0 / std::max(g.norm(), 1e-300));
    LineSearchParams ls = cfg.line_search;
    ls.c2 = std::min(ls.c2, 0.1);
    ls.c1 = std::min(ls.c1, 0.5 * ls.c2);
    int it = 0;
    SolveStatus status = SolveStatus::MaxIterations;
    for (; it < cfg.max_iterations; ++it) {
        if (g.norm() <= cfg.gradient_tolerance) {
            status = SolveStatus::Converged;
            break;
        }
        if (!(d.dot(g) < 0.0)) d = -g;
        const LineFunction phi(obj, x, d, evals, cfg.line_search.max_step_length);
        const double slope = g.dot(d);
        const auto p = zoom_search(phi, Probe{0.0, f, slope, g}, alpha0, ls);
        if (!p) {
            status = SolveStatus::LineSearchFailure;
            break;
        }
        x += p->alpha * d;
        const VecX g_new = p->g;
        const double beta = std::max(0.0, g_new.dot(g_new - g) / g.dot(g));
        const VecX d_new = -g_new + beta * d;
        alpha0 = p->alpha * slope / g_new.dot(d_new);
        if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) alpha0 = 1.0;
        alpha0 = std::min(alpha0, 1.0 / std::max(g_new.norm(), 1e-300) * 10.0);
        f = p->f;
        g = g_new;
        d = d_new;
    }
    return finish(std::move(x), f, g, it, evals, status, cfg.gradient_tolerance);
}

SolveResult run_gauss_newton(const Objective& obj, const VecX& x0, const SolverConfig& cfg) {
    if (!obj.has_residuals())
        throw Error(ErrorCode::UnsupportedBackend, "gauss-newton needs a least-squares objective");
    int evals = 1;
    VecX x = x0, r;
    MatX J;
    obj.residuals(x, r, &J);
    double f = 0.5 * r.squaredNorm();
    VecX g = J.transpose() * r;
    int it = 0;
    SolveStatus status = SolveStatus::MaxIterations;
    for (; it < cfg.max_iterations; ++it) {
        if (g.norm() <= cfg.gradient_tolerance) {
            status = SolveStatus::Converged;
            break;
        }
        MatX H = J.transpose() * J;
        const double scale = std::max(H.diagonal().maxCoeff(), 1e-300);
        H.diagonal().array() += 1e-12 * scale;
        VecX d = H.ldlt().solve(-g);
        if (!d.allFinite() || !(d.dot(g) < 0.0)) d = -g;
        double alpha = std::min(1.0, cfg.line_search.max_step_length / std::max(d.norm(), 1e-300));
        bool accepted = false;
        VecX x_new;
        for (int i = 0; i < cfg.line_search.max_steps; ++i) {
            x_new = x + alpha * d;
            ++evals;
            obj.residuals(x_new, r, nullptr);
            const double f_new = 0.5 * r.squaredNorm();
            if (std::isfinite(f_new) && f_new <= f + cfg.line_search.c1 * alpha * g.dot(d)) {
                accepted = true;
                break;
            }
            alpha *= cfg.line_search.decrease_factor;
        }
        if (!accepted) {
            obj.residuals(x, r, &J);
            status = SolveStatus::LineSearchFailure;
            break;
        }
        x = std::move(x_new);
        obj.residuals(x, r, &J);
        f = 0.5 * r.squaredNorm();
        g = J.transpose() * r;
    }
    return finish(std::move(x), f, g, it, evals, status, cfg.gradient_tolerance);
}

}  // namespace

SolveResult minimize(const Objective& objective, const VecX& x0, const SolverConfig& config) {
    config.validate();
    if (x0.size() != objective.dimension())
        throw Error(ErrorCode::DimensionMismatch, "start point has the wrong dimension");
    switch (config.backend) {
        case Backend::LbfgsBacktracking:
        case Backend::LbfgsZoom:
        case Backend::LbfgsHagerZhang: return run_lbfgs(objective, x0, config);
        case Backend::GradientDescent: return run_gd(objective, x0, config);
        case Backend::NonlinearCG: return run_ncg(objective, x0, config);
        case Backend::GaussNewton: return run_gauss_newton(objective, x0, config);
    }
    throw Error(ErrorCode::UnsupportedBackend, "unknown backend");
}

}  // namespace polarmat
