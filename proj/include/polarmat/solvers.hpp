// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>

namespace polarmat {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Smooth scalar objective. Least-squares objectives also expose residuals
/// r(x) and their Jacobian, with value(x) = 0.5 |r(x)|^2.
class Objective {
public:
    virtual ~Objective() = default;

    virtual int dimension() const = 0;
    virtual double value(const VecX& x) const = 0;
    virtual double value_and_gradient(const VecX& x, VecX& gradient) const = 0;

    virtual bool has_residuals() const { return false; }
    /// Fills r and, when `jacobian` is non-null, J = dr/dx.
    virtual void residuals(const VecX& x, VecX& r, MatX* jacobian) const;
};

enum class Backend {
    LbfgsBacktracking,
    LbfgsZoom,
    LbfgsHagerZhang,
    GradientDescent,
    NonlinearCG,
    GaussNewton,
};

/// Names used on the command line and in manifests: lbfgs-backtracking,
/// lbfgs-zoom, lbfgs-hager-zhang, gd, ncg, gauss-newton.
std::string_view to_string(Backend b);
Backend parse_backend(std::string_view name);

struct LineSearchParams {
    double c1 = 1e-4;              ///< sufficient decrease
    double c2 = 0.9;               ///< curvature (0.1 is used by NCG)
    double decrease_factor = 0.8;  ///< backtracking shrink
    int max_steps = 30;
    /// Longest step any line search takes, measured in the objective's
    /// parameters.
    double max_step_length = 1.0;
};

struct SolverConfig {
    Backend backend = Backend::LbfgsZoom;
    int max_iterations = 500;
    double gradient_tolerance = 1e-10;
    int history = 10;  ///< L-BFGS memory
    LineSearchParams line_search;

    void validate() const;
};

enum class SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailure,
    Underdetermined,
    Degenerate,
};

std::string_view to_string(SolveStatus s);

struct SolveResult {
    VecX x;
    double value = 0.0;
    double gradient_norm = 0.0;  ///< L2 norm of the gradient at x
    int iterations = 0;
    int evaluations = 0;
    SolveStatus status = SolveStatus::MaxIterations;
};

/// Minimizes `objective` from x0 with the configured backend. Line-search
/// failures end the run and return the last accepted iterate. GaussNewton
/// requires residuals and throws UnsupportedBackend otherwise.
SolveResult minimize(const Objective& objective, const VecX& x0, const SolverConfig& config);

}  // namespace polarmat
