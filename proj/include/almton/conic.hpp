#pragma once

#include "almton/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace almton {

/// One linear matrix inequality  constant + sum_j z_j coeffs[j]  >= 0.
struct LmiBlock {
    int size = 0;
    Matrix constant;
    std::vector<Matrix> coeffs;  // one per program variable
};

/// min objective^T z  s.t.  eq_matrix z = eq_rhs,  every LmiBlock PSD.
struct ConicProgram {
    Vector objective;
    Matrix eq_matrix;
    Vector eq_rhs;
    std::vector<LmiBlock> blocks;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_equalities() const { return static_cast<int>(eq_matrix.rows()); }
    /// Throws std::invalid_argument on inconsistent shapes or non-finite data.
    void validate() const;
};

enum class ConicStatus { optimal, infeasible, unbounded, max_iterations, numerical_error };

std::string to_string(ConicStatus status);

struct ConicSettings {
    double tolerance = 1e-8;  // relative residuals and gap
    int max_iterations = 100;
};

struct ConicSolution {
    ConicStatus status = ConicStatus::numerical_error;
    Vector z;                     // primal variables
    std::vector<Matrix> slacks;   // value of each LMI block at z
    double primal_residual = 0.0; // relative
    double dual_residual = 0.0;   // relative
    double gap = 0.0;             // relative
    double objective = 0.0;
    int iterations = 0;
};

/// Adapter to a conic backend capable of equality constraints and PSD cones.
class ConicBackend {
public:
    virtual ~ConicBackend() = default;
    virtual std::string name() const = 0;
    virtual ConicSolution solve(const ConicProgram& program, const ConicSettings& settings) = 0;
};

/// Dense primal-dual path-following method (HKM direction with Mehrotra
/// predictor-corrector). Equalities are eliminated through a nullspace basis
/// first, leaving a pure LMI problem. Meant for the small blocks that arise
/// from cubic subproblems; every matrix is dense.
class InteriorPointBackend final : public ConicBackend {
public:
    std::string name() const override { return "dense-ipm"; }
    ConicSolution solve(const ConicProgram& program, const ConicSettings& settings) override;
};

std::unique_ptr<ConicBackend> make_default_backend();

}  // namespace almton
