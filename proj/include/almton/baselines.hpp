#pragma once

#include "almton/problem.hpp"
#include "almton/run_result.hpp"
#include "almton/sdp.hpp"

#include <string>

namespace almton {

struct BaselineConfig {
    double epsilon = 1e-8;
    int max_iter = 100;
    // gradient descent
    double alpha = 0.01;
    // Armijo backtracking (damped Newton, Newton-CG)
    double armijo = 1e-4;
    double contraction = 0.5;
    int max_backtracks = 50;
    // Newton-CG; 0 means 2n inner iterations
    int cg_max_iter = 0;
    // cubic-regularized Newton
    double sigma0 = 1.0;
    double sigma_min = 1e-8;
    double cr_eta = 0.1;
    double cr_gamma = 2.0;
    // unregularized third-order Newton
    double sdp_tol_loose = 1e-3;
    double sdp_tol_tight = 1e-6;
    double sdp_tol_switch = 1e-3;
    // L-BFGS
    int lbfgs_memory = 10;
    double wolfe_c2 = 0.9;

    void validate() const;
};

/// x_{k+1} = x_k - alpha grad f(x_k).
RunResult gradient_descent(const Problem& f, const Vector& x0, const BaselineConfig& cfg);

/// Newton direction (shifted by lambda I until it is a descent direction when
/// the Hessian is not positive definite) with Armijo backtracking.
RunResult damped_newton(const Problem& f, const Vector& x0, const BaselineConfig& cfg);

/// Truncated CG on the Newton system with forcing term min(0.5, sqrt ||g||),
/// exit on negative curvature, Armijo backtracking.
RunResult newton_cg(const Problem& f, const Vector& x0, const BaselineConfig& cfg);

/// x_{k+1} = strict local minimizer of the cubic Taylor model; stops with
/// sdp_fail when none exists.
RunResult unregularized_third_order(const Problem& f, const Vector& x0, const BaselineConfig& cfg);
RunResult unregularized_third_order(const Problem& f, const Vector& x0, const BaselineConfig& cfg,
                                    CubicSubsolver& solver);

/// Global minimizer of g^T s + 1/2 s^T H s + sigma/3 ||s||^3 by an eigenvalue
/// secular equation, including the hard case.
Vector cubic_regularized_step(const Vector& g, const SymMatrix& H, double sigma);

/// Second-order comparator: cubic-regularized steps with a ratio test,
/// sigma divided by gamma on success and multiplied on failure.
RunResult cubic_regularized_newton(const Problem& f, const Vector& x0, const BaselineConfig& cfg);

/// Two-loop L-BFGS with a strong Wolfe line search.
RunResult lbfgs(const Problem& f, const Vector& x0, const BaselineConfig& cfg);

}  // namespace almton
