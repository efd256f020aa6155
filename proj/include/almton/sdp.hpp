#pragma once

#include "almton/conic.hpp"
#include "almton/cubic.hpp"

#include <memory>
#include <string>

namespace almton {

/// Variable layout of the cubic-minimization SDP: the upper triangle of the
/// symmetric moment matrix X, then x, then y, then the auxiliary vector v.
struct SdpLayout {
    int n = 0;

    int X(int i, int j) const;
    int x(int i) const { return n * (n + 1) / 2 + i; }
    int y() const { return n * (n + 1) / 2 + n; }
    int v(int i) const { return n * (n + 1) / 2 + n + 1 + i; }
    int num_vars() const { return n * (n + 1) / 2 + 2 * n + 1; }
};

/// Semidefinite program whose optimal x block is the strict local minimizer
/// of a cubic, when one exists:
///
///   min  1/2 Tr(QX) + b^T x + 1/2 y
///   s.t. 1/2 Tr(H_i X) + (Qx)_i + b_i = 0,           i = 1..n
///        v_i = Tr(H_i X) + (Qx)_i,                     i = 1..n
///        [ sum_i x_i H_i + Q   v ]        [ X   x ]
///        [ v^T                 y ] >= 0,  [ x^T 1 ] >= 0
///
/// Rows 0..n-1 of the equality matrix are the stationarity rows, rows n..2n-1
/// define v. Block 0 is the curvature block, block 1 the moment block.
struct CubicSdp {
    SdpLayout layout;
    ConicProgram program;
};

CubicSdp build_sdp(const CubicPoly& p);

enum class SdpStatus { minimizer_found, no_local_min, solver_failure };

std::string to_string(SdpStatus status);

struct SdpOutcome {
    SdpStatus status = SdpStatus::solver_failure;
    Vector xbar;                 // set when a minimizer was found
    double kkt_grad_norm = 0.0;  // ||grad psi(xbar)||
    double kkt_min_eig = 0.0;    // lambda_min(hess psi(xbar))
    double rank_gap = 0.0;       // lambda_2 / lambda_1 of [X x; x^T 1]
    ConicStatus backend_status = ConicStatus::numerical_error;
    int backend_iterations = 0;
};

/// Newton's method on grad psi = 0 from x0 (at most 20 steps). Returns the
/// first iterate with ||grad psi|| <= 1e-10 max(1, ||b||), or x0 unchanged
/// when Newton does not get there (singular Hessian, divergence, budget).
Vector polish(const CubicPoly& p, const Vector& x0);

/// Finds the strict local minimizer of a cubic through the SDP above. Owns its
/// backend; distinct instances may be used concurrently.
class CubicSubsolver {
public:
    CubicSubsolver();
    explicit CubicSubsolver(std::unique_ptr<ConicBackend> backend);

    /// tol in [1e-9, 1e-2] is the backend's relative accuracy target. Throws
    /// std::invalid_argument for non-finite data or an out-of-range tol.
    SdpOutcome solve(const CubicPoly& p, double tol);

    const ConicBackend& backend() const { return *backend_; }

private:
    SdpOutcome attempt(const CubicPoly& p, double tol);

    std::unique_ptr<ConicBackend> backend_;
};

/// Convenience wrapper using a fresh default backend.
SdpOutcome solve_cubic(const CubicPoly& p, double tol);

}  // namespace almton
