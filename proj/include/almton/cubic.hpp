#pragma once

#include "almton/tensor.hpp"

namespace almton {

/// psi(s) = 1/6 sum_i s_i s^T H_i s + 1/2 s^T Q s + b^T s + c
struct CubicPoly {
    double c = 0.0;
    Vector b;
    SymMatrix Q;
    ThirdTensor H;

    int dim() const { return static_cast<int>(b.size()); }
    /// Throws std::invalid_argument on inconsistent dimensions.
    void validate() const;
    bool all_finite() const;
};

/// Cubic Taylor model of f at bundle.x, in step coordinates s = x - x_k.
CubicPoly from_bundle(const DerivativeBundle& bundle);

double eval(const CubicPoly& p, const Vector& s);
Vector gradient(const CubicPoly& p, const Vector& s);
SymMatrix hessian(const CubicPoly& p, const Vector& s);

/// Adds sigma ||s||^2, i.e. Q -> Q + 2 sigma I. Throws on sigma < 0.
CubicPoly regularize(const CubicPoly& p, double sigma);

/// Smallest sigma proven sufficient for m(.; sigma) to have a local minimizer:
///   sqrt(3/2 (||g|| ||h|| + g^T h)) - min{0, lambda_min(Hessian)}
/// with g = |grad f| entrywise and h the per-slice spectral norms.
double alpha_lm(const DerivativeBundle& bundle);

/// s^T (H_k / 6 + H_bar / 3) s. When the step ends at a stationary point of the
/// unregularized model this equals p(0) - p(s).
double decrease_identity(const CubicPoly& p, const Vector& step, const SymMatrix& h_center,
                         const SymMatrix& h_bar);

/// Cubic Taylor model plus sigma ||x - center||^2.
class RegularizedModel {
public:
    RegularizedModel(CubicPoly base, double sigma, Vector center);

    const CubicPoly& base() const { return base_; }
    double sigma() const { return sigma_; }
    const Vector& center() const { return center_; }
    /// base with the regularization folded into Q.
    const CubicPoly& poly() const { return regularized_; }

    double value(const Vector& step) const { return eval(regularized_, step); }

private:
    CubicPoly base_;
    double sigma_;
    Vector center_;
    CubicPoly regularized_;
};

}  // namespace almton
