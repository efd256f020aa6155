#include "almton/conic.hpp"
#include "almton/sdp.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace almton;

namespace {

CubicPoly one_d(double b, double q, double h) {
    CubicPoly p;
    p.b = Vector::Constant(1, b);
    p.Q = SymMatrix(Matrix::Constant(1, 1, q));
    p.H = ThirdTensor::from_generator(1, [h](int, int, int) { return h; });
    return p;
}

}  // namespace

TEST_SUITE("sdp") {

TEST_CASE("interior point backend on tiny programs") {
    InteriorPointBackend ipm;
    ConicProgram prog;
    prog.objective = Vector::Ones(1);
    prog.eq_matrix = Matrix::Zero(0, 1);
    prog.eq_rhs = Vector::Zero(0);
    LmiBlock blk;
    blk.size = 2;
    blk.constant = (Matrix(2, 2) << 0, 1, 1, 0).finished();
    blk.coeffs = {Matrix::Identity(2, 2)};
    prog.blocks = {blk};
    ConicSolution sol = ipm.solve(prog, {});
    REQUIRE(sol.status == ConicStatus::optimal);
    CHECK(sol.z(0) == doctest::Approx(1.0).epsilon(1e-6));

    // min z1 + z2  s.t.  z1 = z2,  [[z1, 1], [1, z2]] >= 0
    ConicProgram p2;
    p2.objective = Vector::Ones(2);
    p2.eq_matrix = (Matrix(1, 2) << 1, -1).finished();
    p2.eq_rhs = Vector::Zero(1);
    LmiBlock b2;
    b2.size = 2;
    b2.constant = (Matrix(2, 2) << 0, 1, 1, 0).finished();
    b2.coeffs = {(Matrix(2, 2) << 1, 0, 0, 0).finished(), (Matrix(2, 2) << 0, 0, 0, 1).finished()};
    p2.blocks = {b2};
    sol = ipm.solve(p2, {});
    REQUIRE(sol.status == ConicStatus::optimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));

    p2.eq_rhs = Vector::Zero(3);
    CHECK_THROWS_AS(p2.validate(), std::invalid_argument);
}

TEST_CASE("program dimensions") {
    const CubicSdp one = build_sdp(one_d(-3.0, 0.0, 6.0));
    CHECK(one.program.num_equalities() == 2);
    REQUIRE(one.program.blocks.size() == 2);
    CHECK(one.program.blocks[0].size == 2);
    CHECK(one.program.blocks[1].size == 2);
    std::mt19937_64 rng(1);
    const CubicSdp two = build_sdp(oracle::random_cubic(2, rng));
    CHECK(two.layout.num_vars() == 8);
    CHECK(two.program.num_vars() == 8);
}

TEST_CASE("stationarity rows at a rank-one point reproduce the model gradient") {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 3; ++n) {
        const CubicPoly p = oracle::random_cubic(n, rng);
        const CubicSdp sdp = build_sdp(p);
        const Vector x = Vector::Random(n);
        Vector z = Vector::Zero(sdp.layout.num_vars());
        for (int i = 0; i < n; ++i) {
            z(sdp.layout.x(i)) = x(i);
            for (int j = i; j < n; ++j) z(sdp.layout.X(i, j)) = x(i) * x(j);
        }
        const Vector qx = p.Q.dense() * x;
        for (int i = 0; i < n; ++i) {
            double tr = 0.0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) tr += p.H(i, j, k) * x(j) * x(k);
            z(sdp.layout.v(i)) = tr + qx(i);
        }
        z(sdp.layout.y()) = 1.0;
        const Vector res = sdp.program.eq_matrix * z - sdp.program.eq_rhs;
        const Vector g = oracle::psi_grad(p, x);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(res(i) - g(i)) <= 1e-12);
            CHECK(std::abs(res(n + i)) <= 1e-12);
        }
    }
}

TEST_CASE("one-dimensional classification") {
    const SdpOutcome a = solve_cubic(one_d(-3.0, 0.0, 6.0), 1e-6);
    REQUIRE(a.status == SdpStatus::minimizer_found);
    CHECK(std::abs(a.xbar(0) - 1.0) <= 1e-6);
    CHECK(a.kkt_min_eig > 0.0);
    CHECK(solve_cubic(one_d(0.0, 0.0, 6.0), 1e-6).status == SdpStatus::no_local_min);
    CHECK(solve_cubic(one_d(3.0, 0.0, 6.0), 1e-6).status == SdpStatus::no_local_min);
    // convex quadratic with no cubic term: the minimizer is -b / q
    const SdpOutcome q = solve_cubic(one_d(2.0, 4.0, 0.0), 1e-6);
    REQUIRE(q.status == SdpStatus::minimizer_found);
    CHECK(q.xbar(0) == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(solve_cubic(one_d(-3.0, 0.0, 6.0), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(solve_cubic(one_d(std::nan(""), 0.0, 6.0), 1e-6), std::invalid_argument);
}

TEST_CASE("polish") {
    const CubicPoly p = one_d(-3.0, 0.0, 6.0);
    const Vector one = Vector::Constant(1, 1.0);
    CHECK(polish(p, one)(0) == 1.0);
    CHECK(polish(p, Vector::Constant(1, 0.9))(0) == doctest::Approx(1.0).epsilon(1e-12));
    // no stationary point: x0 comes back unchanged
    const CubicPoly q = one_d(3.0, 0.0, 6.0);
    CHECK(polish(q, Vector::Constant(1, 0.3))(0) == 0.3);
}

TEST_CASE("agreement with multistart Newton on random cubics") {
    std::mt19937_64 rng(2024);
    CubicSubsolver solver;
    int agree = 0;
    int polished = 0;
    int found = 0;
    for (int k = 0; k < 20; ++k) {
        const CubicPoly p = oracle::random_cubic(2 + k % 2, rng);
        const auto ms = oracle::multistart_newton(p, 200, 500 + k);
        const SdpOutcome out = solver.solve(p, 1e-6);
        const bool sdp_found = out.status == SdpStatus::minimizer_found;
        if (sdp_found == ms.minimizer.has_value()) {
            if (!sdp_found || (out.xbar - *ms.minimizer).norm() <= 1e-4) ++agree;
        }
        if (sdp_found) {
            ++found;
            polished += oracle::psi_grad(p, out.xbar).norm() <= 1e-10 * std::max(1.0, p.b.norm()) ? 1 : 0;
        }
    }
    CHECK(agree >= 19);
    CHECK(polished >= 0.95 * found);
}

TEST_CASE("deterministic statuses") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 5; ++k) {
        const CubicPoly p = oracle::random_cubic(3, rng);
        const SdpOutcome a = solve_cubic(p, 1e-6);
        const SdpOutcome b = solve_cubic(p, 1e-6);
        CHECK(a.status == b.status);
        if (a.status == SdpStatus::minimizer_found) CHECK(a.xbar == b.xbar);
    }
}

}
