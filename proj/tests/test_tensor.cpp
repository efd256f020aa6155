#include "almton/problem.hpp"
#include "almton/tensor.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace almton;

namespace {

ThirdTensor random_tensor(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Matrix> slices;
    for (int i = 0; i < n; ++i) slices.push_back(Matrix::NullaryExpr(n, n, [&] { return u(rng); }));
    return ThirdTensor::from_slices(slices);
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("contract3 small cases") {
    CHECK(contract3(ThirdTensor::zero(3), Vector::Constant(3, 2.5)) == 0.0);
    const ThirdTensor t = ThirdTensor::from_generator(1, [](int, int, int) { return 6.0; });
    CHECK(contract3(t, Vector::Constant(1, 2.0)) == doctest::Approx(48.0));
}

TEST_CASE("contractions agree with explicit loops") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + rep % 4;
        const ThirdTensor t = random_tensor(n, rng);
        const Vector s = Vector::Random(n);
        CHECK(contract3(t, s) == doctest::Approx(oracle::triple(t, s)).epsilon(1e-12));
        const Vector c2 = contract2(t, s);
        const SymMatrix c1 = contract1(t, s);
        for (int i = 0; i < n; ++i) {
            double a2 = 0.0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) a2 += t(i, j, k) * s(j) * s(k);
            CHECK(c2(i) == doctest::Approx(a2).epsilon(1e-12));
            for (int j = 0; j < n; ++j) {
                double a1 = 0.0;
                for (int k = 0; k < n; ++k) a1 += t(k, i, j) * s(k);
                CHECK(c1(i, j) == doctest::Approx(a1).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("tensor symmetry and dimension checks") {
    std::mt19937_64 rng(3);
    const ThirdTensor t = random_tensor(3, rng);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                CHECK(t(i, j, k) == t(j, i, k));
                CHECK(t(i, j, k) == t(k, j, i));
                CHECK(t(i, j, k) == t(i, k, j));
            }
    CHECK_THROWS_AS(contract3(t, Vector::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(contract1(t, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("min_eigenvalue") {
    CHECK(min_eigenvalue(SymMatrix::identity(3)) == doctest::Approx(1.0));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = -2.0;
    d(1, 1) = 5.0;
    CHECK(min_eigenvalue(SymMatrix(d)) == doctest::Approx(-2.0));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Matrix a = Matrix::NullaryExpr(5, 5, [&] { return u(rng); });
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    CHECK(std::abs(min_eigenvalue(SymMatrix(a)) - es.eigenvalues().minCoeff()) <= 1e-10);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = bad(1, 0) = std::nan("");
    CHECK_THROWS_AS(min_eigenvalue(SymMatrix(bad)), std::domain_error);
}

TEST_CASE("operator norms") {
    CHECK(operator_norm(ThirdTensor::zero(2)) == 0.0);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -4.0;
    CHECK(operator_norm(SymMatrix(d)) == doctest::Approx(4.0));
    CHECK(operator_norm(Vector(Vector::Constant(4, 0.5))) == doctest::Approx(1.0));

    std::mt19937_64 rng(5);
    const ThirdTensor t = random_tensor(2, rng);
    std::normal_distribution<double> nd;
    double sampled = 0.0;
    for (int k = 0; k < 10000; ++k) {
        Vector v(2);
        v << nd(rng), nd(rng);
        v.normalize();
        sampled = std::max(sampled, std::abs(oracle::triple(t, v)));
    }
    CHECK(operator_norm(t) >= sampled - 1e-12);
}

TEST_CASE("fd_check") {
    Matrix a(3, 3);
    a << 4, 1, 0, 1, 3, -1, 0, -1, 2;
    const Problem q = quadratic(a, Vector::Zero(3));
    const Vector x = (Vector(3) << 0.3, -0.7, 1.1).finished();
    const auto eval = [&](const Vector& y) { return q.bundle(y); };
    const FdReport rq = fd_check(q.bundle(x), eval, 1e-5);
    CHECK(rq.gradient <= 1e-8);
    CHECK(rq.tensor <= 1e-5);

    const Problem r = rosenbrock(2);
    const Vector x0 = (Vector(2) << -1.2, 1.0).finished();
    const FdReport rr = fd_check(r.bundle(x0), [&](const Vector& y) { return r.bundle(y); }, 1e-5);
    CHECK(rr.gradient <= 1e-4);
    CHECK(rr.hessian <= 1e-4);
    CHECK(rr.tensor <= 1e-4);

    DerivativeBundle bad = r.bundle(x0);
    bad.g(0) += 10.0;
    CHECK(fd_check(bad, [&](const Vector& y) { return r.bundle(y); }).gradient > 1e-2);
}

TEST_CASE("bundle validation") {
    DerivativeBundle b = rosenbrock(2).bundle(Vector::Zero(2));
    CHECK_NOTHROW(b.validate());
    b.g = Vector::Zero(3);
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

}
