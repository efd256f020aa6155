#include "almton/problem.hpp"

#include <doctest.h>

#include <random>

using namespace almton;

namespace {

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

std::vector<Problem> analytic() {
    std::vector<Problem> ps = classic_2d_suite();
    ps.push_back(rosenbrock(2));
    ps.push_back(rosenbrock(5));
    ps.push_back(hairpin_surrogate());
    return ps;
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("Rosenbrock values") {
    const Problem r = rosenbrock(2);
    CHECK(r.value(vec2(1.0, 1.0)) == 0.0);
    CHECK(r.bundle(vec2(1.0, 1.0)).g.norm() == 0.0);
    CHECK(r.value(vec2(0.0, 0.0)) == 1.0);
    CHECK(r.value(vec2(-1.2, 1.0)) == doctest::Approx(24.2).epsilon(1e-14));
    const Problem r5 = rosenbrock(5);
    CHECK(r5.value(Vector::Ones(5)) == 0.0);
    CHECK(r5.standard_start == Vector::Constant(5, -1.0));
    CHECK_THROWS_AS(rosenbrock(1), std::invalid_argument);
}

TEST_CASE("classic functions at known points") {
    CHECK(himmelblau().value(vec2(3.0, 2.0)) == 0.0);
    CHECK(three_hump_camel().value(vec2(0.0, 0.0)) == 0.0);
    for (const Problem& p : analytic()) {
        for (const Vector& m : p.known_minimizers) {
            const DerivativeBundle b = p.bundle(m);
            CHECK(b.g.norm() <= 1e-8);
            CHECK(min_eigenvalue(b.H) > 0.0);
            CHECK(b.f >= p.f_low);
        }
    }
}

TEST_CASE("lower bounds hold on samples") {
    std::mt19937_64 rng(3);
    for (const Problem& p : analytic()) {
        for (int k = 0; k < 500; ++k) {
            Vector x(p.n);
            for (int i = 0; i < p.n; ++i) x(i) = std::uniform_real_distribution<double>(p.lo(i), p.hi(i))(rng);
            CHECK(p.value(x) >= p.f_low);
        }
    }
}

TEST_CASE("evaluation orders") {
    const Problem r = rosenbrock(3);
    const DerivativeBundle b0 = r.evaluate(Vector::Zero(3), 0);
    CHECK(b0.g.size() == 0);
    const DerivativeBundle b2 = r.evaluate(Vector::Zero(3), 2);
    CHECK(b2.H.dim() == 3);
    CHECK(b2.T.dim() == 0);
    CHECK_THROWS_AS(r.evaluate(Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("hairpin barrier") {
    const Scalar3 in = hairpin_barrier(0.0, -0.4, 0.5);
    CHECK(in.v == 0.0);
    CHECK(in.d1 == 0.0);
    CHECK(in.d2 == 0.0);
    CHECK(in.d3 == 0.0);
    const Scalar3 out = hairpin_barrier(1.5, -0.4, 0.5);
    CHECK(out.v == doctest::Approx(1.0));
    CHECK(out.d1 == doctest::Approx(4.0));
    // Third derivative at the knots: a central difference of the second
    // derivative across the knot agrees with the analytic value, and the
    // one-sided values shrink linearly with h.
    const double h = 1e-4;
    for (double knot : {-0.4, 0.5}) {
        const auto d2 = [](double x) { return hairpin_barrier(x, -0.4, 0.5).d2; };
        const double fd = (d2(knot + h) - d2(knot - h)) / (2.0 * h);
        CHECK(std::abs(fd - hairpin_barrier(knot, -0.4, 0.5).d3) <= 1e-3);
        const double wide = std::abs(hairpin_barrier(knot + h, -0.4, 0.5).d3 - hairpin_barrier(knot - h, -0.4, 0.5).d3);
        const double narrow =
            std::abs(hairpin_barrier(knot + h / 10, -0.4, 0.5).d3 - hairpin_barrier(knot - h / 10, -0.4, 0.5).d3);
        CHECK(narrow <= 0.11 * wide);
    }
}

TEST_CASE("finite-difference wrapper") {
    const Problem r = rosenbrock(2);
    const Problem w = fd_problem_wrapper(
        "rosen_fd", [&](const Vector& x) { return r.value(x); }, 2, r.lo, r.hi);
    CHECK(w.approximate);
    const Vector x = vec2(-0.7, 0.4);
    const DerivativeBundle a = r.bundle(x);
    const DerivativeBundle b = w.bundle(x);
    CHECK((a.g - b.g).norm() <= 1e-3 * std::max(1.0, a.g.norm()));
    CHECK((a.H.dense() - b.H.dense()).norm() <= 1e-3 * std::max(1.0, a.H.dense().norm()));
    CHECK((a.T.unfolding() - b.T.unfolding()).norm() <= 1e-3 * std::max(1.0, a.T.unfolding().norm()));

    // An O(1) constant term would add rounding noise of about ulp(1) / h^3
    // to the tensor, so the map is kept linear.
    const Problem lin = fd_problem_wrapper(
        "linear", [](const Vector& x) { return 2.0 * x(0) - 3.0 * x(1); }, 2, r.lo, r.hi);
    const DerivativeBundle l = lin.bundle(Vector::Zero(2));
    CHECK(l.H.dense().norm() <= 1e-6);
    CHECK(l.T.unfolding().norm() <= 1e-6);
    CHECK((l.g - vec2(2.0, -3.0)).norm() <= 1e-6);

    const Problem con = fd_problem_wrapper(
        "constant", [](const Vector&) { return 4.0; }, 2, r.lo, r.hi);
    CHECK(con.bundle(vec2(0.3, 0.1)).g.norm() == 0.0);
}

TEST_CASE("registry") {
    CHECK(make_problem("rosenbrock").n == 2);
    CHECK(make_problem("rosenbrock:7").n == 7);
    CHECK(make_problem("camel3").name == "camel3");
    CHECK(problems_by_name("classic").size() == 4);
    CHECK_THROWS_AS(make_problem("nope"), std::invalid_argument);
    CHECK_THROWS_AS(make_problem("rosenbrock:x"), std::invalid_argument);
}

TEST_CASE("derivatives pass finite-difference checks") {
    std::mt19937_64 rng(99);
    for (const Problem& p : analytic()) {
        for (int k = 0; k < 20; ++k) {
            Vector x(p.n);
            for (int i = 0; i < p.n; ++i) x(i) = std::uniform_real_distribution<double>(p.lo(i), p.hi(i))(rng);
            const FdReport rep = fd_check(p.bundle(x), [&](const Vector& y) { return p.bundle(y); });
            CHECK(rep.gradient <= 1e-6);
            CHECK(rep.hessian <= 1e-5);
            CHECK(rep.tensor <= 1e-4);
        }
    }
}

}
