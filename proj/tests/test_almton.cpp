#include "almton/almton.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace almton;

namespace {

DerivativeBundle one_d_bundle(double f, double g, double h, double t) {
    DerivativeBundle b;
    b.x = Vector::Zero(1);
    b.f = f;
    b.g = Vector::Constant(1, g);
    b.H = SymMatrix(Matrix::Constant(1, 1, h));
    b.T = ThirdTensor::from_generator(1, [t](int, int, int) { return t; });
    return b;
}

Problem half_norm(int n) { return quadratic(Matrix::Identity(n, n), Vector::Zero(n), "half_norm"); }

Vector vec2(double a, double b) { return (Vector(2) << a, b).finished(); }

}  // namespace

TEST_SUITE("almton") {

TEST_CASE("config validation and strategy names") {
    AlmtonConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.c = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.eta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.epsilon = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(parse_strategy("simple") == Strategy::simple);
    CHECK(parse_strategy(to_string(Strategy::heuristic)) == Strategy::heuristic);
    CHECK_THROWS_AS(parse_strategy("interp"), std::invalid_argument);
}

TEST_CASE("subproblem tolerance schedule") {
    AlmtonConfig cfg;
    CHECK(sdp_tolerance(1.0, cfg) == cfg.sdp_tol_loose);
    CHECK(sdp_tolerance(1e-5, cfg) == cfg.sdp_tol_tight);
}

TEST_CASE("acceptance ratio arithmetic") {
    AlmtonConfig cfg;
    CHECK(acceptance_ratio(5.0, 4.0, Vector::Constant(1, 1.0), 1.0, 4.0, cfg) == doctest::Approx(1.0));
    cfg.l = 0.1;
    CHECK(acceptance_ratio(3.0, 3.0, Vector::Constant(1, 1.0), 0.0, 0.0, cfg) == 0.0);
    CHECK(acceptance_ratio(5.0, 4.0, vec2(0.0, 2.0), 0.0, 0.0, cfg) == doctest::Approx(2.5));
    CHECK(acceptance_ratio(5.0, 4.0, Vector::Zero(2), 0.0, 0.0, cfg) < -1e300);
    CHECK(acceptance_ratio(5.0, std::nan(""), vec2(1, 0), 0.0, 0.0, cfg) < -1e300);
}

TEST_CASE("acceptance ratio below the resolution of f") {
    AlmtonConfig cfg;
    const double f = 0.3;
    const double ulp = std::nextafter(f, 1.0) - f;
    // predicted decrease far below ulp(f): noise either way must not reject
    CHECK(acceptance_ratio(f, f + ulp, vec2(1e-9, 0), 1.0, f - 1e-18, cfg) > cfg.eta);
    CHECK(acceptance_ratio(f, f - ulp, vec2(1e-9, 0), 1.0, f - 1e-18, cfg) > cfg.eta);
    CHECK(acceptance_ratio(f, f + ulp, vec2(1e-8, 0), 0.0, 0.0, cfg) > cfg.eta);
    // a genuine increase is still rejected
    CHECK(acceptance_ratio(f, f + 1e-12, vec2(1e-9, 0), 1.0, f - 1e-18, cfg) < 0.0);
    // a model value above f_k beyond the shift
    CHECK(acceptance_ratio(f, f, vec2(1e-9, 0), 1.0, f + 1e-12, cfg) < -1e300);
}

TEST_CASE("sigma update rules") {
    AlmtonConfig cfg;
    cfg.gamma = 3.0;
    CHECK(sigma_update(Strategy::simple, 0.0, 0.0, 0.3, cfg) == 1.0);
    CHECK(sigma_update(Strategy::simple, 2.0, 0.0, 0.3, cfg) == 6.0);
    CHECK(sigma_update(Strategy::heuristic, 0.0, 0.5, 10.0, cfg) == 10.0);
    CHECK(sigma_update(Strategy::heuristic, 0.0, 4.0, 1.0, cfg) == 12.0);
}

TEST_CASE("simple phase") {
    AlmtonConfig cfg;
    CubicSubsolver solver;
    const Problem q = half_norm(2);
    const PhaseResult ok = step_simple(q.bundle(vec2(3.0, 4.0)), 0.0, cfg, solver);
    REQUIRE(ok.valid);
    CHECK((ok.step - vec2(-3.0, -4.0)).norm() <= 1e-8);
    CHECK(ok.sigma_tilde == 0.0);

    const PhaseResult bad = step_simple(one_d_bundle(0.0, 3.0, 0.0, 6.0), 0.0, cfg, solver);
    CHECK_FALSE(bad.valid);
    CHECK(bad.step.norm() == 0.0);
    CHECK(bad.sdp_status == SdpStatus::no_local_min);
}

TEST_CASE("heuristic phase") {
    AlmtonConfig cfg;
    CubicSubsolver solver;
    const PhaseResult first = step_heuristic(half_norm(2).bundle(vec2(3.0, 4.0)), 0.0, cfg, solver);
    REQUIRE(first.valid);
    CHECK(first.sigma_tilde == 0.0);
    CHECK(first.solves == 1);

    // psi = -0.001 s + 0.0025 s^2: minimizer curvature c/2 at sigma = 0, so
    // sigma_tilde jumps to max{alpha_LM, gamma * 1, c/2} = 3 and the retry passes.
    const PhaseResult retry = step_heuristic(one_d_bundle(0.0, -0.001, cfg.c / 2.0, 0.0), 0.0, cfg, solver);
    REQUIRE(retry.valid);
    CHECK(retry.solves == 2);
    CHECK(retry.sigma_tilde == doctest::Approx(3.0));
    CHECK(retry.lambda_bar >= cfg.c);

    AlmtonConfig capped;
    capped.inner_cap = 1;
    const PhaseResult stuck = step_heuristic(one_d_bundle(0.0, 3.0, 0.0, 6.0), 0.0, capped, solver);
    CHECK_FALSE(stuck.valid);
    CHECK(stuck.sigma_exceeded);
}

TEST_CASE("exact model converges in one iteration") {
    for (Strategy s : {Strategy::simple, Strategy::heuristic}) {
        AlmtonConfig cfg;
        cfg.strategy = s;
        const RunResult r = run(half_norm(2), vec2(3.0, 4.0), cfg);
        CHECK(r.status == RunStatus::converged);
        CHECK(r.counts.iterations == 1);
        CHECK(r.counts.successful == 1);
        CHECK(r.x_final.norm() <= 1e-8);
    }
}

TEST_CASE("stationary start terminates immediately") {
    const RunResult r = run(rosenbrock(2), vec2(1.0, 1.0), AlmtonConfig{});
    CHECK(r.status == RunStatus::converged);
    CHECK(r.counts.iterations == 0);
    CHECK(r.counts.f_evals == 1);
    CHECK_THROWS_AS(run(rosenbrock(2), Vector::Zero(3), AlmtonConfig{}), std::invalid_argument);
}

TEST_CASE("failed first phase raises sigma to max{1, alpha_LM}") {
    const Problem r = rosenbrock(2);
    const Vector x0 = vec2(-1.2, 1.0);
    AlmtonConfig cfg;
    cfg.max_iter = 3;
    const RunResult res = run(r, x0, cfg);
    REQUIRE(res.ledger.size() >= 2);
    CHECK_FALSE(res.ledger[0].success);
    CHECK(res.ledger[0].sigma == 0.0);
    CHECK(res.ledger[1].sigma == doctest::Approx(std::max(1.0, alpha_lm(r.bundle(x0)))));
}

TEST_CASE("heuristic phase exits satisfy the model invariants on Rosenbrock") {
    const Problem r = rosenbrock(2);
    AlmtonConfig cfg;
    cfg.strategy = Strategy::heuristic;
    cfg.max_iter = 60;
    const RunResult res = run(r, vec2(-1.2, 1.0), cfg);
    int checked = 0;
    for (const IterationRecord& rec : res.ledger) {
        if (rec.step_norm == 0.0 || std::isnan(rec.lambda_bar)) continue;
        ++checked;
        const DerivativeBundle b = r.bundle(rec.x);
        const CubicPoly m = regularize(from_bundle(b), rec.sigma_tilde);
        CHECK(oracle::psi_grad(m, rec.step).norm() <= 1e-6);
        CHECK(rec.lambda_bar >= cfg.c - 1e-9);
        CHECK(oracle::psi(m, rec.step) <= b.f + 1e-9);
    }
    CHECK(checked > 10);
}

TEST_CASE("Rosenbrock reaches (1, 1) given a large budget") {
    for (Strategy s : {Strategy::simple, Strategy::heuristic}) {
        AlmtonConfig cfg;
        cfg.strategy = s;
        cfg.max_iter = 2000;
        const RunResult r = run(rosenbrock(2), vec2(-1.2, 1.0), cfg);
        CHECK(r.status == RunStatus::converged);
        CHECK(r.grad_norm_final <= 1e-8);
        CHECK((r.x_final - vec2(1.0, 1.0)).norm() <= 1e-6);
        MESSAGE(to_string(s) << ": " << r.counts.iterations << " iterations");
    }
}

TEST_CASE("monotone iterates and sigma reset") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 6; ++k) {
        AlmtonConfig cfg;
        cfg.strategy = k % 2 ? Strategy::heuristic : Strategy::simple;
        const RunResult r = run(himmelblau(), vec2(2.5 * u(rng), 2.5 * u(rng)), cfg);
        for (std::size_t i = 0; i + 1 < r.ledger.size(); ++i) {
            CHECK(r.ledger[i + 1].f <= r.ledger[i].f + 1e-12);
            if (r.ledger[i].success) CHECK(r.ledger[i + 1].sigma == 0.0);
        }
        if (!r.ledger.empty()) CHECK(r.f_final <= r.ledger.front().f + 1e-12);
    }
}

TEST_CASE("counters") {
    AlmtonConfig cfg;
    const RunResult r = run(himmelblau(), vec2(0.0, 0.0), cfg);
    REQUIRE(r.status == RunStatus::converged);
    int trials = 0;
    for (const IterationRecord& rec : r.ledger) trials += std::isnan(rec.f_trial) ? 0 : 1;
    CHECK(r.counts.f_evals == 1 + trials);
    CHECK(r.counts.iterations == static_cast<int>(r.ledger.size()));
    CHECK(r.counts.successful + r.counts.unsuccessful_sigma0 + r.counts.unsuccessful_sigmapos == r.counts.iterations);
}

}
