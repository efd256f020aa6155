#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace almton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense symmetric matrix. Symmetrized on construction so that A(i,j) and
/// A(j,i) are bitwise identical.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& a);

    static SymMatrix zero(int n);
    static SymMatrix identity(int n);

    int dim() const { return static_cast<int>(data_.rows()); }
    double operator()(int i, int j) const { return data_(i, j); }
    const Matrix& dense() const { return data_; }

    SymMatrix operator+(const SymMatrix& other) const;
    SymMatrix operator-(const SymMatrix& other) const;
    SymMatrix operator*(double alpha) const;
    /// A + t I
    SymMatrix shifted(double t) const;

private:
    Matrix data_;
};

/// Fully symmetric third-order tensor stored as n matrix slices; slice i is
/// the matrix (T_ijk)_{jk}.
class ThirdTensor {
public:
    ThirdTensor() = default;

    static ThirdTensor zero(int n);

    /// Builds from a generator that is queried only for i <= j <= k; every
    /// permutation of (i, j, k) then holds the same value.
    static ThirdTensor from_generator(int n, const std::function<double(int, int, int)>& entry);

    /// Builds from arbitrary (not necessarily symmetric) slices by averaging
    /// over the six index permutations.
    static ThirdTensor from_slices(const std::vector<Matrix>& slices);

    int dim() const { return static_cast<int>(slices_.size()); }
    const SymMatrix& slice(int i) const { return slices_[static_cast<std::size_t>(i)]; }
    double operator()(int i, int j, int k) const { return slices_[static_cast<std::size_t>(i)](j, k); }

    ThirdTensor operator+(const ThirdTensor& other) const;
    ThirdTensor operator-(const ThirdTensor& other) const;
    ThirdTensor operator*(double alpha) const;

    /// Mode-1 unfolding, n x n^2.
    Matrix unfolding() const;

private:
    std::vector<SymMatrix> slices_;
};

/// f, gradient, Hessian and third derivative of a function at one point.
struct DerivativeBundle {
    Vector x;
    double f = 0.0;
    Vector g;
    SymMatrix H;
    ThirdTensor T;

    int dim() const { return static_cast<int>(x.size()); }
    /// Throws std::invalid_argument if the component dimensions disagree.
    void validate() const;
};

// Contractions T[s]^k. Throw std::invalid_argument on dimension mismatch.
double contract3(const ThirdTensor& t, const Vector& s);
/// Entries s^T H_i s.
Vector contract2(const ThirdTensor& t, const Vector& s);
/// sum_i s_i H_i.
SymMatrix contract1(const ThirdTensor& t, const Vector& s);

/// Smallest eigenvalue; throws std::domain_error on non-finite entries.
double min_eigenvalue(const SymMatrix& a);

/// Euclidean norm.
double operator_norm(const Vector& v);
/// Spectral norm (largest |eigenvalue|).
double operator_norm(const SymMatrix& a);
/// Upper bound on max |T[u,v,w]| over unit vectors: the spectral norm of the
/// mode-1 unfolding. All unfoldings of a symmetric tensor coincide up to a
/// column permutation, so this is also the minimum over unfoldings.
double operator_norm(const ThirdTensor& t);

/// Maximum relative error per derivative order, each measured as
/// max |approx - exact| / max(1, max |exact|).
struct FdReport {
    double gradient = 0.0;
    double hessian = 0.0;
    double tensor = 0.0;
};

using BundleEvaluator = std::function<DerivativeBundle(const Vector&)>;

/// Central-difference check of a bundle: the gradient against differences of
/// f, the Hessian against differences of the gradient, the tensor against
/// differences of the Hessian. The evaluator is only queried at perturbed
/// points, so a corrupted `bundle` is detected.
FdReport fd_check(const DerivativeBundle& bundle, const BundleEvaluator& evaluate, double h = 1e-5);

}  // namespace almton
