#pragma once

#include "almton/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace almton {

/// Evaluates f and its derivatives up to `order` (0..3). Components above the
/// requested order are left empty.
using ProblemEvaluator = std::function<DerivativeBundle(const Vector& x, int order)>;

/// Test function with derivatives through order three. Evaluators are pure
/// and may be called concurrently.
struct Problem {
    std::string name;
    int n = 0;
    ProblemEvaluator evaluator;
    Vector lo;
    Vector hi;
    std::vector<Vector> known_minimizers;
    double f_low = 0.0;
    Vector standard_start;
    bool approximate = false;  // derivatives from finite differences

    DerivativeBundle evaluate(const Vector& x, int order = 3) const;
    double value(const Vector& x) const;
    /// Full order-3 bundle, validated.
    DerivativeBundle bundle(const Vector& x) const { return evaluate(x, 3); }
};

Problem rosenbrock(int n);
Problem himmelblau();
/// 2x^2 - 1.05x^4 + x^6/6 + xy + y^2
Problem three_hump_camel();
/// 1/2 sum (x_i^4 - 16 x_i^2 + 5 x_i), two dimensions
Problem styblinski_tang();
/// (x^2 - 1)^2 + 2 (y - x)^2: minima at +-(1, 1), saddle at the origin
Problem two_well();
/// The four 2-D functions used for basin studies.
std::vector<Problem> classic_2d_suite();

/// 0.5 x^T A x + b^T x. A must be symmetric.
Problem quadratic(const Matrix& a, const Vector& b, std::string name = "quadratic");

/// Value and first three derivatives of a scalar function of one variable.
struct Scalar3 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// (x - xmin)^4 below xmin, 0 inside, (x - xmax)^4 above xmax.
Scalar3 hairpin_barrier(double x, double xmin, double xmax);

/// A hairpin-shaped valley: h(x) ((1 - w(x)) u(y) + w(x)) + 3e-4 x
/// + 50 b(x, -0.4, 0.5) + 50 b(y, 0, 5) with h = 1 + x^2,
/// w = ((x^2 - 1/4) / (3/4))^2 and u = 2 / (1 + e^y). Not the published
/// Hairpin Turn objective, whose core polynomials are unavailable.
Problem hairpin_surrogate();

/// Builds a problem from a scalar function alone. The gradient and Hessian are
/// central differences, the tensor an 8-point central difference with h = 1e-4.
Problem fd_problem_wrapper(std::string name, std::function<double(const Vector&)> f, int n, Vector lo,
                           Vector hi);

/// Registered names: rosenbrock (n = 2), rosenbrock:N, himmelblau, camel3,
/// styblinski_tang, two_well, hairpin_surrogate, classic (suite, see
/// problems_by_name). Throws std::invalid_argument for unknown names.
Problem make_problem(const std::string& name);
/// Expands "classic" into the suite, otherwise a single problem.
std::vector<Problem> problems_by_name(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace almton
