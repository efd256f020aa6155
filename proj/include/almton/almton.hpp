#pragma once

#include "almton/cubic.hpp"
#include "almton/problem.hpp"
#include "almton/run_result.hpp"
#include "almton/sdp.hpp"

#include <string>

namespace almton {

enum class Strategy { simple, heuristic };

std::string to_string(Strategy s);
/// Accepts "simple" and "heuristic"; throws std::invalid_argument otherwise.
Strategy parse_strategy(const std::string& name);

struct AlmtonConfig {
    double epsilon = 1e-8;
    double c = 1e-2;
    double l = 1e-3;
    double eta = 0.1;
    double gamma = 3.0;
    int max_iter = 100;
    double sigma_cap = 1e10;
    Strategy strategy = Strategy::simple;
    int inner_cap = 60;
    // Subproblem accuracy: loose while ||grad f|| > tol_switch, tight afterwards.
    double sdp_tol_loose = 1e-3;
    double sdp_tol_tight = 1e-6;
    double sdp_tol_switch = 1e-3;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// Outcome of one model phase.
struct PhaseResult {
    bool valid = false;
    Vector step;  // zero when invalid
    double sigma_tilde = 0.0;
    double lambda_bar = kNaN;
    double model_value = kNaN;  // m(x_bar; sigma_tilde)
    SdpStatus sdp_status = SdpStatus::no_local_min;
    int solves = 0;
    bool sigma_exceeded = false;  // heuristic loop hit inner_cap or sigma_cap
};

/// Subproblem tolerance for the current gradient norm.
double sdp_tolerance(double grad_norm, const AlmtonConfig& cfg);

/// One subproblem solve at sigma_tilde = sigma_k.
PhaseResult step_simple(const DerivativeBundle& bundle, double sigma_k, const AlmtonConfig& cfg,
                        CubicSubsolver& solver);

/// Raises sigma_tilde from sigma_k until the regularized model has a local
/// minimizer with curvature at least c and value at most f(x_k).
PhaseResult step_heuristic(const DerivativeBundle& bundle, double sigma_k, const AlmtonConfig& cfg,
                           CubicSubsolver& solver);

/// Returns -infinity for a zero step or a non-finite trial value. When the
/// denominator is below 10 eps max(1, |f_k|), numerator and denominator are
/// both shifted by that amount.
double acceptance_ratio(double f_k, double f_bar, const Vector& step, double sigma_tilde, double model_val,
                        const AlmtonConfig& cfg);

/// Regularization after an unsuccessful iteration.
double sigma_update(Strategy strategy, double sigma_k, double sigma_tilde, double alpha_lm,
                    const AlmtonConfig& cfg);

RunResult run(const Problem& problem, const Vector& x0, const AlmtonConfig& cfg);
RunResult run(const Problem& problem, const Vector& x0, const AlmtonConfig& cfg, CubicSubsolver& solver);

}  // namespace almton
