// Acceptance checks. One PASS/FAIL line per criterion; exit status is nonzero
// when any selected criterion fails. Usage: acceptance [--only N]...

#include "almton/bench.hpp"
#include "almton/diagnostics.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace almton;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

CubicPoly model_of(const DerivativeBundle& b) {
    CubicPoly p;
    p.c = b.f;
    p.b = b.g;
    p.Q = b.H;
    p.H = b.T;
    return p;
}

// Shared by criteria 2 and 3: five problems, three seeded starts each, both
// strategies, default budget.
std::vector<std::pair<Problem, RunResult>> batch_runs() {
    std::vector<Problem> problems = classic_2d_suite();
    problems.push_back(rosenbrock(2));
    std::vector<std::pair<Problem, RunResult>> out;
    std::mt19937_64 rng(20240611);
    for (const Problem& p : problems) {
        for (int s = 0; s < 3; ++s) {
            Vector x0(p.n);
            for (int i = 0; i < p.n; ++i) x0(i) = std::uniform_real_distribution<double>(p.lo(i), p.hi(i))(rng);
            for (Strategy st : {Strategy::simple, Strategy::heuristic}) {
                AlmtonConfig cfg;
                cfg.strategy = st;
                out.emplace_back(p, run(p, x0, cfg));
            }
        }
    }
    return out;
}

const std::vector<std::pair<Problem, RunResult>>& batch() {
    static const auto runs = batch_runs();
    return runs;
}

Verdict ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    CubicSubsolver solver;
    int agree = 0;
    int found = 0;
    int polished = 0;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const CubicPoly p = oracle::random_cubic(2 + k % 2, rng);
        const auto ms = oracle::multistart_newton(p, 200, 1000 + static_cast<std::uint64_t>(k));
        const SdpOutcome out = solver.solve(p, 1e-6);
        const bool sdp_found = out.status == SdpStatus::minimizer_found;
        if (sdp_found == ms.minimizer.has_value()) {
            if (sdp_found) {
                const double err = (out.xbar - *ms.minimizer).norm();
                worst = std::max(worst, err);
                agree += err <= 1e-4 ? 1 : 0;
            } else {
                ++agree;
            }
        }
        if (sdp_found) {
            ++found;
            polished += oracle::psi_grad(p, out.xbar).norm() <= 1e-10 * std::max(1.0, p.b.norm()) ? 1 : 0;
        }
    }
    const double secs = seconds_since(t0);
    return {agree >= 98 && secs <= 120.0,
            fmt("agreement %d/100 (need >= 98), %d minimizers, worst position error %.2e, polished %d/%d, %.1fs",
                agree, found, worst, polished, found, secs)};
}

Verdict ac2() {
    int checked = 0;
    double worst = 0.0;
    for (const auto& [p, r] : batch()) {
        for (const IterationRecord& rec : r.ledger) {
            if (!rec.success || rec.sigma_tilde != 0.0) continue;
            const CubicPoly m = model_of(p.bundle(rec.x));
            const Vector& s = rec.step;
            const double direct = oracle::psi(m, Vector::Zero(p.n)) - oracle::psi(m, s);
            const Matrix hbar = oracle::psi_hess(m, s);
            const double ident = s.dot((m.Q.dense() / 6.0 + hbar / 3.0) * s);
            worst = std::max(worst, std::abs(direct - ident) / (1.0 + std::abs(direct)));
            ++checked;
        }
    }
    return {checked > 0 && worst <= 1e-8,
            fmt("%d unregularized accepted steps over %zu runs, worst scaled gap %.2e (bound 1e-8)", checked,
                batch().size(), worst)};
}

Verdict ac3() {
    int mono = 0;
    int reset = 0;
    int pairs = 0;
    for (const auto& [p, r] : batch()) {
        std::vector<double> fs;
        std::vector<double> sig;
        std::vector<bool> succ;
        for (const IterationRecord& rec : r.ledger) {
            fs.push_back(rec.f);
            sig.push_back(rec.sigma);
            succ.push_back(rec.success);
        }
        fs.push_back(r.f_final);
        for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
            ++pairs;
            mono += fs[i + 1] <= fs[i] + 1e-12 ? 0 : 1;
        }
        for (std::size_t i = 0; i + 1 < sig.size(); ++i) {
            if (succ[i] && sig[i + 1] != 0.0) ++reset;
        }
    }
    return {mono == 0 && reset == 0,
            fmt("%d consecutive pairs: %d monotonicity violations, %d sigma-reset violations", pairs, mono, reset)};
}

Verdict ac4() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int ok = 0;
    double worst = 0.0;
    std::string bad;
    for (int k = 0; k < 10; ++k) {
        const int n = k + 1;
        const Matrix a = oracle::random_spd(n, rng);
        Vector b(n), x0(n);
        for (int i = 0; i < n; ++i) {
            b(i) = u(rng);
            x0(i) = u(rng);
        }
        const Problem q = quadratic(a, b);
        const Vector newton = -a.ldlt().solve(a * x0 + b);
        bool all = true;
        for (Strategy st : {Strategy::simple, Strategy::heuristic}) {
            AlmtonConfig cfg;
            cfg.strategy = st;
            const RunResult r = run(q, x0, cfg);
            const bool one = r.status == RunStatus::converged && r.counts.iterations == 1 && r.counts.successful == 1;
            const double err = r.ledger.empty() ? INFINITY : (r.ledger[0].step - newton).norm() / std::max(1.0, newton.norm());
            worst = std::max(worst, err);
            if (!one || err > 1e-8) {
                all = false;
                bad += fmt(" n=%d/%s(it=%d,err=%.1e)", n, to_string(st).c_str(), r.counts.iterations, err);
            }
        }
        ok += all ? 1 : 0;
    }
    return {ok == 10, fmt("%d/10 quadratics (n = 1..10) solved in one successful step by both strategies, worst "
                          "relative step error %.2e%s",
                          ok, worst, bad.c_str())};
}

Verdict ac5() {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem r2 = rosenbrock(2);
    const Vector x0 = (Vector(2) << -1.2, 1.0).finished();
    bool pass = true;
    std::string detail;
    for (Strategy st : {Strategy::simple, Strategy::heuristic}) {
        AlmtonConfig cfg;
        cfg.strategy = st;
        const RunResult r = run(r2, x0, cfg);
        const double dist = (r.x_final - Vector::Ones(2)).norm();
        const bool ok = r.status == RunStatus::converged && r.grad_norm_final <= 1e-8 && dist <= 1e-6;
        pass = pass && ok;
        cfg.max_iter = 5000;
        const RunResult longer = run(r2, x0, cfg);
        detail += fmt("%s: %s after %d iterations (|g| %.2e, |x - x*| %.2e); with 5000 allowed: %s in %d; ",
                      to_string(st).c_str(), to_string(r.status).c_str(), r.counts.iterations, r.grad_norm_final,
                      dist, to_string(longer.status).c_str(), longer.counts.iterations);
    }
    // n = 5 stress protocol, reported only
    SolverOptions opts;
    opts.epsilon = 1e-6;
    opts.budget = 1000;
    const std::vector<SolverSpec> solvers{make_solver("almton-simple", opts), make_solver("almton-heuristic", opts)};
    const auto rows = stress_protocol(5, solvers, 10, 1e-6);
    for (const StressRow& row : rows) {
        detail += fmt("n=5 %s %d/%d success, median %g iterations, %g f-evals; ", row.solver.c_str(), row.successes,
                      row.trials, row.median_iterations, row.median_f_evals);
    }
    const double secs = seconds_since(t0);
    detail += fmt("protocol time %.0fs (limit 1800s)", secs);
    return {pass && secs <= 1800.0, detail};
}

Verdict ac6() {
    SolverOptions opts;
    opts.epsilon = 1e-6;
    opts.budget = 1000;
    const std::vector<SolverSpec> solvers{make_solver("newton-cg", opts), make_solver("lbfgs", opts)};
    bool pass = true;
    std::string detail;
    for (int n : {5, 20}) {
        for (const StressRow& row : stress_protocol(n, solvers, 10, 1e-6)) {
            pass = pass && row.successes == row.trials;
            detail += fmt("n=%d %s %d/%d (median %g iterations); ", n, row.solver.c_str(), row.successes, row.trials,
                          row.median_iterations);
        }
    }
    return {pass, detail};
}

struct SuiteBatch {
    std::vector<TrialRecord> records;
    int runs = 0;
    int counts[5] = {0, 0, 0, 0, 0};
};

const SuiteBatch& suite_batch() {
    static const SuiteBatch b = [] {
        SuiteBatch out;
        SolverOptions opts;
        const std::vector<SolverSpec> extra{make_solver("newton", opts), make_solver("gd", opts),
                                            make_solver("cubic-reg", opts)};
        const std::vector<Problem> suite = classic_2d_suite();
        for (const Problem& p : suite) {
            GridSpec spec;
            spec.counts = {30, 30};
            std::vector<Trial> trials;
            for (const Vector& x : grid_starts(spec, p)) trials.push_back({&p, x, 0});
            for (Strategy st : {Strategy::simple, Strategy::heuristic}) {
                AlmtonConfig cfg;
                cfg.strategy = st;
                SolverSpec s{"almton-" + to_string(st), [cfg](const Problem& pr, const Vector& x) { return run(pr, x, cfg); }};
                std::vector<RunResult> runs;
                const auto recs = run_trials(trials, {s}, cfg.epsilon, Metric::iterations, 0, &runs);
                out.records.insert(out.records.end(), recs.begin(), recs.end());
                for (const RunResult& r : runs) {
                    const AuditReport rep = audit_run(r, estimate_bounds(r, p, cfg), cfg);
                    for (int c = 0; c < 5; ++c) out.counts[c] += rep.count(static_cast<char>('a' + c));
                    ++out.runs;
                }
            }
            const auto recs = run_trials(trials, extra, 1e-8, Metric::iterations);
            out.records.insert(out.records.end(), recs.begin(), recs.end());
        }
        return out;
    }();
    return b;
}

Verdict ac7() {
    const SuiteBatch& b = suite_batch();
    int ok = 0;
    for (const TrialRecord& r : b.records) ok += r.success && r.solver.rfind("almton", 0) == 0 ? 1 : 0;
    return {b.counts[0] == 0 && b.counts[2] == 0 && b.counts[3] == 0,
            fmt("%d ALMTON runs (4 problems x 30x30 grid x 2 strategies, %d converged): violations a=%d c=%d d=%d "
                "(informational: b=%d e=%d)",
                b.runs, ok, b.counts[0], b.counts[2], b.counts[3], b.counts[1], b.counts[4])};
}

Verdict ac8() {
    // Hand-worked matrix:   a    b    c
    //                  p1  10   40   inf
    //                  p2  30   15   45
    //                  p3  inf  inf  inf
    const double inf = INFINITY;
    auto rec = [](const std::string& p, const std::string& s, double t) {
        TrialRecord r;
        r.problem = p;
        r.start = Vector::Zero(1);
        r.solver = s;
        r.success = std::isfinite(t);
        r.metric = t;
        return r;
    };
    const auto cs = performance_profile({rec("p1", "a", 10), rec("p1", "b", 40), rec("p1", "c", inf),
                                         rec("p2", "a", 30), rec("p2", "b", 15), rec("p2", "c", 45),
                                         rec("p3", "a", inf), rec("p3", "b", inf), rec("p3", "c", inf)});
    const double t = 1.0 / 3.0;
    const std::vector<std::vector<double>> expected{{t, 2 * t, 2 * t, 2 * t}, {t, t, t, 2 * t}, {0, 0, t, t}};
    bool hand = cs.size() == 3;
    for (std::size_t i = 0; hand && i < 3; ++i) {
        hand = cs[i].tau == std::vector<double>{1, 2, 3, 4} && cs[i].rho == expected[i];
    }

    const auto& recs = suite_batch().records;
    const auto curves = performance_profile(recs);
    int broken = 0;
    for (const ProfileCurve& c : curves) {
        int wins = 0;
        int total = 0;
        for (const TrialRecord& r : recs) {
            if (r.solver != c.solver) continue;
            ++total;
            wins += r.success ? 1 : 0;
        }
        for (std::size_t i = 0; i < c.rho.size(); ++i) {
            if (c.rho[i] < 0.0 || c.rho[i] > 1.0 || (i > 0 && c.rho[i] < c.rho[i - 1])) ++broken;
        }
        if (std::abs(profile_value(c, INFINITY) - static_cast<double>(wins) / total) > 1e-12) ++broken;
        if (std::abs(c.rho.back() - static_cast<double>(wins) / total) > 1e-12) ++broken;
    }
    // every instance with a finite metric has a best ratio of exactly one
    std::map<std::pair<std::string, std::vector<double>>, double> best;
    for (const TrialRecord& r : recs) {
        const auto key = std::make_pair(r.problem, std::vector<double>(r.start.data(), r.start.data() + r.start.size()));
        if (!best.count(key)) best[key] = inf;
        if (r.success) best[key] = std::min(best[key], std::max(r.metric, 1.0));
    }
    std::size_t finite_instances = 0;
    for (const auto& [k, v] : best) finite_instances += std::isfinite(v) ? 1 : 0;
    std::size_t ones = 0;
    for (const ProfileCurve& c : curves) ones += static_cast<std::size_t>(std::count(c.ratios.begin(), c.ratios.end(), 1.0));
    const bool min_one = ones >= finite_instances;
    return {hand && broken == 0 && min_one,
            fmt("hand 3x3 oracle %s; %zu curves over %zu instances, %d invariant violations, %zu instances with a "
                "finite best and %zu ratio-one entries",
                hand ? "exact" : "MISMATCH", curves.size(), best.size(), broken, finite_instances, ones)};
}

Verdict ac9() {
    std::vector<Problem> problems = classic_2d_suite();
    problems.push_back(rosenbrock(2));
    problems.push_back(rosenbrock(5));
    problems.push_back(hairpin_surrogate());
    std::mt19937_64 rng(9);
    double worst[3] = {0, 0, 0};
    int failures = 0;
    for (const Problem& p : problems) {
        for (int k = 0; k < 20; ++k) {
            Vector x(p.n);
            for (int i = 0; i < p.n; ++i) x(i) = std::uniform_real_distribution<double>(p.lo(i), p.hi(i))(rng);
            const FdReport rep = fd_check(p.bundle(x), [&p](const Vector& y) { return p.bundle(y); });
            worst[0] = std::max(worst[0], rep.gradient);
            worst[1] = std::max(worst[1], rep.hessian);
            worst[2] = std::max(worst[2], rep.tensor);
            failures += rep.gradient <= 1e-6 && rep.hessian <= 1e-5 && rep.tensor <= 1e-4 ? 0 : 1;
        }
    }
    return {failures == 0, fmt("%zu problems x 20 points, %d failures; worst relative errors %.1e / %.1e / %.1e "
                               "(limits 1e-6 / 1e-5 / 1e-4)",
                               problems.size(), failures, worst[0], worst[1], worst[2])};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"subproblem oracle equivalence", ac1},
        {"exact decrease identity on unregularized steps", ac2},
        {"monotonicity and sigma reset", ac3},
        {"quadratic one-step property", ac4},
        {"Rosenbrock n=2 from (-1.2, 1) within 100 iterations", ac5},
        {"Newton-CG and L-BFGS on the stress protocol", ac6},
        {"bound audit (a), (c), (d) on the classic suite", ac7},
        {"performance profile correctness", ac8},
        {"derivative finite-difference checks", ac9},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--only N]...\n", argv[0]);
            return 2;
        }
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("AC%d %s  %s (%.1fs): %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first, seconds_since(t0),
                    v.detail.c_str());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
