#include "almton/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace almton {

namespace {

void require_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) {
        throw std::domain_error(std::string(what) + ": non-finite entries");
    }
}

void require_dim(int expected, Eigen::Index got, const char* what) {
    if (got != expected) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                    std::to_string(expected) + ", got " + std::to_string(got) + ")");
    }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("SymMatrix: matrix is not square");
    }
    data_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
    require_dim(dim(), other.dim(), "SymMatrix::operator+");
    return SymMatrix(data_ + other.data_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
    require_dim(dim(), other.dim(), "SymMatrix::operator-");
    return SymMatrix(data_ - other.data_);
}

SymMatrix SymMatrix::operator*(double alpha) const { return SymMatrix(alpha * data_); }

SymMatrix SymMatrix::shifted(double t) const {
    Matrix a = data_;
    a.diagonal().array() += t;
    return SymMatrix(a);
}

ThirdTensor ThirdTensor::zero(int n) {
    ThirdTensor t;
    t.slices_.assign(static_cast<std::size_t>(n), SymMatrix::zero(n));
    return t;
}

ThirdTensor ThirdTensor::from_generator(int n, const std::function<double(int, int, int)>& entry) {
    std::vector<Matrix> raw(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            for (int k = j; k < n; ++k) {
                const double v = entry(i, j, k);
                const std::array<std::array<int, 3>, 6> perms{{{i, j, k}, {i, k, j}, {j, i, k},
                                                                {j, k, i}, {k, i, j}, {k, j, i}}};
                for (const auto& p : perms) {
                    raw[static_cast<std::size_t>(p[0])](p[1], p[2]) = v;
                }
            }
        }
    }
    ThirdTensor t;
    t.slices_.reserve(raw.size());
    for (auto& m : raw) {
        t.slices_.emplace_back(m);
    }
    return t;
}

ThirdTensor ThirdTensor::from_slices(const std::vector<Matrix>& slices) {
    const int n = static_cast<int>(slices.size());
    for (const auto& s : slices) {
        if (s.rows() != n || s.cols() != n) {
            throw std::invalid_argument("ThirdTensor::from_slices: slice shape must be n x n");
        }
    }
    auto at = [&](int i, int j, int k) { return slices[static_cast<std::size_t>(i)](j, k); };
    return from_generator(n, [&](int i, int j, int k) {
        // Fixed summation order so every permutation sees the same rounding.
        const double sum = at(i, j, k) + at(i, k, j) + at(j, i, k) + at(j, k, i) + at(k, i, j) + at(k, j, i);
        return sum / 6.0;
    });
}

ThirdTensor ThirdTensor::operator+(const ThirdTensor& other) const {
    require_dim(dim(), other.dim(), "ThirdTensor::operator+");
    ThirdTensor t;
    for (int i = 0; i < dim(); ++i) {
        t.slices_.push_back(slice(i) + other.slice(i));
    }
    return t;
}

ThirdTensor ThirdTensor::operator-(const ThirdTensor& other) const {
    require_dim(dim(), other.dim(), "ThirdTensor::operator-");
    ThirdTensor t;
    for (int i = 0; i < dim(); ++i) {
        t.slices_.push_back(slice(i) - other.slice(i));
    }
    return t;
}

ThirdTensor ThirdTensor::operator*(double alpha) const {
    ThirdTensor t;
    for (const auto& s : slices_) {
        t.slices_.push_back(s * alpha);
    }
    return t;
}

Matrix ThirdTensor::unfolding() const {
    const int n = dim();
    Matrix u(n, n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                u(i, j * n + k) = (*this)(i, j, k);
            }
        }
    }
    return u;
}

void DerivativeBundle::validate() const {
    const int n = dim();
    require_dim(n, g.size(), "DerivativeBundle gradient");
    require_dim(n, H.dim(), "DerivativeBundle Hessian");
    require_dim(n, T.dim(), "DerivativeBundle tensor");
}

double contract3(const ThirdTensor& t, const Vector& s) {
    require_dim(t.dim(), s.size(), "contract3");
    return s.dot(contract2(t, s));
}

Vector contract2(const ThirdTensor& t, const Vector& s) {
    require_dim(t.dim(), s.size(), "contract2");
    Vector out(t.dim());
    for (int i = 0; i < t.dim(); ++i) {
        out(i) = s.dot(t.slice(i).dense() * s);
    }
    return out;
}

SymMatrix contract1(const ThirdTensor& t, const Vector& s) {
    require_dim(t.dim(), s.size(), "contract1");
    Matrix acc = Matrix::Zero(t.dim(), t.dim());
    for (int i = 0; i < t.dim(); ++i) {
        acc += s(i) * t.slice(i).dense();
    }
    return SymMatrix(acc);
}

double min_eigenvalue(const SymMatrix& a) {
    require_finite(a.dense(), "min_eigenvalue");
    if (a.dim() == 0) {
        throw std::invalid_argument("min_eigenvalue: empty matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double operator_norm(const Vector& v) {
    require_finite(v, "operator_norm");
    return v.norm();
}

double operator_norm(const SymMatrix& a) {
    require_finite(a.dense(), "operator_norm");
    if (a.dim() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const ThirdTensor& t) {
    if (t.dim() == 0) {
        return 0.0;
    }
    const Matrix u = t.unfolding();
    require_finite(u, "operator_norm");
    // Largest singular value via the n x n Gram matrix.
    Eigen::SelfAdjointEigenSolver<Matrix> es(u * u.transpose(), Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues()(t.dim() - 1)));
}

namespace {

double relative_error(double max_abs_diff, double max_abs_exact) {
    return max_abs_diff / std::max(1.0, max_abs_exact);
}

}  // namespace

FdReport fd_check(const DerivativeBundle& bundle, const BundleEvaluator& evaluate, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("fd_check: step must be positive");
    }
    bundle.validate();
    const int n = bundle.dim();
    double g_diff = 0.0;
    double h_diff = 0.0;
    double t_diff = 0.0;
    for (int k = 0; k < n; ++k) {
        Vector xp = bundle.x;
        Vector xm = bundle.x;
        xp(k) += h;
        xm(k) -= h;
        const DerivativeBundle bp = evaluate(xp);
        const DerivativeBundle bm = evaluate(xm);
        const double dk = (bp.f - bm.f) / (2.0 * h);
        g_diff = std::max(g_diff, std::abs(dk - bundle.g(k)));
        const Vector dg = (bp.g - bm.g) / (2.0 * h);
        h_diff = std::max(h_diff, (dg - bundle.H.dense().col(k)).cwiseAbs().maxCoeff());
        const Matrix dH = (bp.H.dense() - bm.H.dense()) / (2.0 * h);
        t_diff = std::max(t_diff, (dH - bundle.T.slice(k).dense()).cwiseAbs().maxCoeff());
    }
    double t_scale = 0.0;
    for (int i = 0; i < n; ++i) {
        t_scale = std::max(t_scale, bundle.T.slice(i).dense().cwiseAbs().maxCoeff());
    }
    FdReport report;
    report.gradient = relative_error(g_diff, n > 0 ? bundle.g.cwiseAbs().maxCoeff() : 0.0);
    report.hessian = relative_error(h_diff, n > 0 ? bundle.H.dense().cwiseAbs().maxCoeff() : 0.0);
    report.tensor = relative_error(t_diff, t_scale);
    return report;
}

}  // namespace almton
