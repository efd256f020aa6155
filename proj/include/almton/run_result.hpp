#pragma once

#include "almton/tensor.hpp"

#include <limits>
#include <string>
#include <vector>

namespace almton {

enum class RunStatus { converged, max_iterations_exceeded, sigma_exceeded, subsolver_error, sdp_fail, diverged };

std::string to_string(RunStatus status);
/// Short failure tag used in result tables; empty for converged runs.
std::string reason_tag(RunStatus status);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One outer iteration. Fields a method does not use stay NaN (reals), empty
/// (strings, vectors) or zero (counts).
struct IterationRecord {
    int k = 0;
    Vector x;                      // iterate at the start of the iteration
    double f = kNaN;
    double grad_norm = kNaN;
    double sigma = kNaN;           // outer regularization sigma_k
    double sigma_tilde = kNaN;     // phase-closing regularization
    Vector step;
    double step_norm = kNaN;
    bool success = false;          // step accepted
    double rho = kNaN;
    std::string subsolver_status;
    int inner_count = 0;           // subproblem solves this iteration
    double f_trial = kNaN;
    double model_decrease = kNaN;     // f_k - m(x_bar; sigma_tilde)
    double identity_decrease = kNaN;  // s^T (H_k/6 + H_bar/3) s, unregularized steps
    double lambda_bar = kNaN;
    double lambda_min_hk = kNaN;      // lambda_min of the Hessian at x_k
    double grad_norm_next = kNaN;     // ||grad f(x_k + s_k)|| when accepted
};

struct RunCounts {
    int iterations = 0;
    int successful = 0;
    int unsuccessful_sigma0 = 0;
    int unsuccessful_sigmapos = 0;
    int f_evals = 0;
    int derivative_evals = 0;
    int sdp_solves = 0;
};

struct RunResult {
    std::string solver;
    RunStatus status = RunStatus::max_iterations_exceeded;
    Vector x_final;
    double f_final = kNaN;
    double grad_norm_final = kNaN;
    RunCounts counts;
    std::vector<IterationRecord> ledger;
    double seconds = 0.0;
    std::string message;  // detail for error statuses
};

}  // namespace almton
