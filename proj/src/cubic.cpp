#include "almton/cubic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace almton {

namespace {

void require_step(const CubicPoly& p, const Vector& s, const char* what) {
    if (s.size() != p.dim()) {
        throw std::invalid_argument(std::string(what) + ": step dimension " + std::to_string(s.size()) +
                                    " does not match polynomial dimension " + std::to_string(p.dim()));
    }
}

}  // namespace

void CubicPoly::validate() const {
    if (Q.dim() != dim() || H.dim() != dim()) {
        throw std::invalid_argument("CubicPoly: inconsistent coefficient dimensions");
    }
}

bool CubicPoly::all_finite() const {
    if (!std::isfinite(c) || !b.allFinite() || !Q.dense().allFinite()) {
        return false;
    }
    for (int i = 0; i < H.dim(); ++i) {
        if (!H.slice(i).dense().allFinite()) {
            return false;
        }
    }
    return true;
}

CubicPoly from_bundle(const DerivativeBundle& bundle) {
    bundle.validate();
    return CubicPoly{bundle.f, bundle.g, bundle.H, bundle.T};
}

double eval(const CubicPoly& p, const Vector& s) {
    require_step(p, s, "eval");
    const Vector hs = contract2(p.H, s);
    return p.c + p.b.dot(s) + 0.5 * s.dot(p.Q.dense() * s) + s.dot(hs) / 6.0;
}

Vector gradient(const CubicPoly& p, const Vector& s) {
    require_step(p, s, "gradient");
    // (sum_i s_i H_i s)_j = s^T H_j s by full symmetry.
    return 0.5 * contract2(p.H, s) + p.Q.dense() * s + p.b;
}

SymMatrix hessian(const CubicPoly& p, const Vector& s) {
    require_step(p, s, "hessian");
    return contract1(p.H, s) + p.Q;
}

CubicPoly regularize(const CubicPoly& p, double sigma) {
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("regularize: sigma must be nonnegative");
    }
    if (sigma == 0.0) {
        return p;
    }
    CubicPoly out = p;
    out.Q = p.Q.shifted(2.0 * sigma);
    return out;
}

double alpha_lm(const DerivativeBundle& bundle) {
    bundle.validate();
    const int n = bundle.dim();
    const Vector g = bundle.g.cwiseAbs();
    Vector h(n);
    for (int i = 0; i < n; ++i) {
        h(i) = operator_norm(bundle.T.slice(i));
    }
    const double inner = 1.5 * (g.norm() * h.norm() + g.dot(h));
    const double lam = min_eigenvalue(bundle.H);
    return std::sqrt(std::max(0.0, inner)) - std::min(0.0, lam);
}

double decrease_identity(const CubicPoly& p, const Vector& step, const SymMatrix& h_center,
                         const SymMatrix& h_bar) {
    require_step(p, step, "decrease_identity");
    return step.dot((h_center.dense() / 6.0 + h_bar.dense() / 3.0) * step);
}

RegularizedModel::RegularizedModel(CubicPoly base, double sigma, Vector center)
    : base_(std::move(base)), sigma_(sigma), center_(std::move(center)), regularized_(regularize(base_, sigma)) {
    if (center_.size() != base_.dim()) {
        throw std::invalid_argument("RegularizedModel: center dimension mismatch");
    }
}

}  // namespace almton
