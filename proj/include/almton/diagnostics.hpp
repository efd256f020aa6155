#pragma once

#include "almton/almton.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace almton {

/// Constants of the complexity analysis, estimated along one run.
struct TheoryBounds {
    std::optional<double> L_hat;        // absent with fewer than two distinct iterates
    std::array<double, 3> Lambda{};     // max ||grad||, ||Hessian||, ||tensor|| over iterates
    double alpha_max = 0.0;             // sqrt(3 Lambda1 sqrt(n) Lambda3) + Lambda2
    double sigma_max = 0.0;             // max(alpha_max, 16 L Lambda1^2 / (3 c^2 (1 - eta)))
    double kappa_s = 0.0;               // (2 sigma_max + L)^2 / (eta l)
    int n = 0;
};

/// Lambda_j are maxima over every iterate in the ledger plus the final point;
/// derivatives are recomputed from the problem. L_hat is the largest
/// ||T(x) - T(y)|| / (2 ||x - y||) over consecutive distinct iterates, with the
/// unfolding norm standing in for the tensor norm (an over-estimate).
TheoryBounds estimate_bounds(const RunResult& run, const Problem& problem, const AlmtonConfig& cfg);

/// alpha_max, sigma_max and kappa_s from given Lambda and L.
TheoryBounds theory_constants(const std::array<double, 3>& lambda, std::optional<double> L_hat, int n,
                              const AlmtonConfig& cfg);

struct AuditViolation {
    char check = '?';  // 'a'..'e'
    int k = -1;        // iteration, -1 for run-level checks
    double value = 0.0;
    double bound = 0.0;
};

/// (a) ||s_k|| <= 4 Lambda1 / c; (b) on successes ||s_k|| >= min{1,
/// ||grad f(x_k + s_k)|| / (2 sigma_max + L)} - 1e-9; (c) sigma_tilde_k <=
/// sigma_max; (d) k + 1 <= (2 + K)|S| + 1 + K with K = ceil(log sigma_max /
/// log gamma); (e) |U1| <= |S| + 1.
struct AuditReport {
    TheoryBounds bounds;
    int iterations = 0;
    int successes = 0;
    int unsuccessful_sigma0 = 0;
    int complexity_K = 0;
    std::vector<AuditViolation> violations;

    int count(char check) const;
    bool clean(const std::string& checks = "abcde") const;
    std::string text() const;
    /// Machine-readable rows "audit,<run_id>,<check>,<k>,<value>,<bound>": one
    /// summary row per check (k = summary, value = violation count) followed by
    /// one row per violation.
    std::string csv_rows(const std::string& run_id) const;
};

AuditReport audit_run(const RunResult& run, const TheoryBounds& bounds, const AlmtonConfig& cfg);

}  // namespace almton
