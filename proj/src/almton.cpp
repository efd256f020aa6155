#include "almton/almton.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace almton {

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::converged: return "converged";
        case RunStatus::max_iterations_exceeded: return "max_iterations_exceeded";
        case RunStatus::sigma_exceeded: return "sigma_exceeded";
        case RunStatus::subsolver_error: return "subsolver_error";
        case RunStatus::sdp_fail: return "sdp_fail";
        case RunStatus::diverged: return "diverged";
    }
    return "unknown";
}

std::string reason_tag(RunStatus status) {
    switch (status) {
        case RunStatus::converged: return "";
        case RunStatus::max_iterations_exceeded: return "max_iter";
        case RunStatus::sigma_exceeded: return "sigma_exc";
        case RunStatus::subsolver_error: return "subsolver_error";
        case RunStatus::sdp_fail: return "sdp_fail";
        case RunStatus::diverged: return "diverged";
    }
    return "unknown";
}

std::string to_string(Strategy s) { return s == Strategy::simple ? "simple" : "heuristic"; }

Strategy parse_strategy(const std::string& name) {
    if (name == "simple") return Strategy::simple;
    if (name == "heuristic") return Strategy::heuristic;
    throw std::invalid_argument("unknown strategy '" + name + "' (expected simple or heuristic)");
}

void AlmtonConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
    if (!(l > 0.0 && l <= c / 6.0)) throw std::invalid_argument("l must lie in (0, c/6]");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
    if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
    if (!(sigma_cap > 0.0)) throw std::invalid_argument("sigma_cap must be positive");
    if (inner_cap < 1) throw std::invalid_argument("inner_cap must be at least 1");
    for (double t : {sdp_tol_loose, sdp_tol_tight}) {
        if (!(t >= 1e-9 && t <= 1e-2)) throw std::invalid_argument("sdp tolerances must lie in [1e-9, 1e-2]");
    }
    if (!(sdp_tol_switch >= 0.0)) throw std::invalid_argument("sdp_tol_switch must be nonnegative");
}

double sdp_tolerance(double grad_norm, const AlmtonConfig& cfg) {
    return grad_norm > cfg.sdp_tol_switch ? cfg.sdp_tol_loose : cfg.sdp_tol_tight;
}

namespace {

// Solves the model at one regularization value and fills the curvature data.
PhaseResult solve_phase(const CubicPoly& base, double sigma_tilde, double tol, CubicSubsolver& solver) {
    PhaseResult out;
    out.sigma_tilde = sigma_tilde;
    out.step = Vector::Zero(base.dim());
    const CubicPoly p = regularize(base, sigma_tilde);
    const SdpOutcome o = solver.solve(p, tol);
    out.sdp_status = o.status;
    out.solves = 1;
    if (o.status == SdpStatus::minimizer_found) {
        out.step = o.xbar;
        out.lambda_bar = min_eigenvalue(hessian(p, o.xbar));
        out.model_value = eval(p, o.xbar);
    }
    return out;
}

}  // namespace

PhaseResult step_simple(const DerivativeBundle& bundle, double sigma_k, const AlmtonConfig& cfg,
                        CubicSubsolver& solver) {
    const CubicPoly base = from_bundle(bundle);
    PhaseResult out = solve_phase(base, sigma_k, sdp_tolerance(bundle.g.norm(), cfg), solver);
    out.valid = out.sdp_status == SdpStatus::minimizer_found && out.lambda_bar >= cfg.c;
    if (!out.valid) {
        out.step.setZero();
    }
    return out;
}

PhaseResult step_heuristic(const DerivativeBundle& bundle, double sigma_k, const AlmtonConfig& cfg,
                           CubicSubsolver& solver) {
    const CubicPoly base = from_bundle(bundle);
    const double tol = sdp_tolerance(bundle.g.norm(), cfg);
    const double alpha = alpha_lm(bundle);
    double sigma_tilde = sigma_k;
    PhaseResult last;
    int solves = 0;
    while (solves < cfg.inner_cap && sigma_tilde <= cfg.sigma_cap) {
        last = solve_phase(base, sigma_tilde, tol, solver);
        ++solves;
        last.solves = solves;
        const bool found = last.sdp_status == SdpStatus::minimizer_found;
        if (found && last.lambda_bar >= cfg.c && last.model_value <= bundle.f) {
            last.valid = true;
            return last;
        }
        const double correction = found ? std::max(0.0, cfg.c - last.lambda_bar) : 0.0;
        sigma_tilde = std::max({alpha, cfg.gamma * std::max(1.0, sigma_tilde), sigma_tilde + correction});
    }
    last.valid = false;
    last.sigma_exceeded = true;
    last.sigma_tilde = sigma_tilde;
    last.solves = solves;
    last.step = Vector::Zero(bundle.dim());
    return last;
}

double acceptance_ratio(double f_k, double f_bar, const Vector& step, double sigma_tilde, double model_val,
                        const AlmtonConfig& cfg) {
    constexpr double minus_inf = -std::numeric_limits<double>::infinity();
    const double sn = step.norm();
    if (sn == 0.0 || !std::isfinite(f_bar)) {
        return minus_inf;
    }
    const double actual = f_k - f_bar;
    const double denom = sigma_tilde == 0.0 ? cfg.l * sn * sn : f_k - model_val;
    // Below the resolution of f both differences are rounding noise; shift
    // them by delta so that the ratio tends to one instead of being random.
    const double delta = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f_k));
    if (denom > delta) {
        return actual / denom;
    }
    if (!(denom + delta > 0.0)) {
        return minus_inf;
    }
    return (actual + delta) / (denom + delta);
}

double sigma_update(Strategy strategy, double sigma_k, double sigma_tilde, double alpha_lm,
                    const AlmtonConfig& cfg) {
    if (strategy == Strategy::simple) {
        return sigma_k == 0.0 ? std::max(1.0, alpha_lm) : cfg.gamma * sigma_k;
    }
    return std::max(alpha_lm, cfg.gamma * std::max(1.0, sigma_tilde));
}

RunResult run(const Problem& problem, const Vector& x0, const AlmtonConfig& cfg) {
    CubicSubsolver solver;
    return run(problem, x0, cfg, solver);
}

RunResult run(const Problem& problem, const Vector& x0, const AlmtonConfig& cfg, CubicSubsolver& solver) {
    cfg.validate();
    if (x0.size() != problem.n) {
        throw std::invalid_argument("run: start point dimension does not match the problem");
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    r.solver = "almton-" + to_string(cfg.strategy);
    RunCounts& cnt = r.counts;

    Vector x = x0;
    DerivativeBundle b = problem.bundle(x);
    cnt.derivative_evals = 1;
    cnt.f_evals = 1;
    double sigma = 0.0;

    for (int k = 0;; ++k) {
        if (!std::isfinite(b.f) || !b.g.allFinite()) {
            r.status = RunStatus::diverged;
            break;
        }
        const double gn = b.g.norm();
        if (gn <= cfg.epsilon) {
            r.status = RunStatus::converged;
            break;
        }
        if (k >= cfg.max_iter) {
            r.status = RunStatus::max_iterations_exceeded;
            break;
        }
        if (!b.H.dense().allFinite()) {
            r.status = RunStatus::diverged;
            break;
        }

        IterationRecord rec;
        rec.k = k;
        rec.x = x;
        rec.f = b.f;
        rec.grad_norm = gn;
        rec.sigma = sigma;
        rec.lambda_min_hk = min_eigenvalue(b.H);

        PhaseResult ph;
        try {
            ph = cfg.strategy == Strategy::simple ? step_simple(b, sigma, cfg, solver)
                                                  : step_heuristic(b, sigma, cfg, solver);
        } catch (const std::exception& e) {
            r.status = RunStatus::subsolver_error;
            r.message = e.what();
            break;
        }
        cnt.sdp_solves += ph.solves;
        rec.inner_count = ph.solves;
        rec.sigma_tilde = ph.sigma_tilde;
        rec.lambda_bar = ph.lambda_bar;
        rec.subsolver_status = to_string(ph.sdp_status);
        rec.step = ph.step;
        rec.step_norm = ph.step.norm();

        double rho = -std::numeric_limits<double>::infinity();
        Vector x_trial;
        if (ph.valid) {
            x_trial = x + ph.step;
            rec.f_trial = problem.value(x_trial);
            ++cnt.f_evals;
            rec.model_decrease = b.f - ph.model_value;
            if (ph.sigma_tilde == 0.0) {
                const CubicPoly base = from_bundle(b);
                rec.identity_decrease = decrease_identity(base, ph.step, b.H, hessian(base, ph.step));
            }
            rho = acceptance_ratio(b.f, rec.f_trial, ph.step, ph.sigma_tilde, ph.model_value, cfg);
        }
        rec.rho = rho;
        rec.success = rho >= cfg.eta;

        bool stop = false;
        if (rec.success) {
            x = x_trial;
            b = problem.bundle(x);
            ++cnt.derivative_evals;
            rec.grad_norm_next = b.g.norm();
            sigma = 0.0;
            ++cnt.successful;
        } else {
            if (sigma == 0.0) {
                ++cnt.unsuccessful_sigma0;
            } else {
                ++cnt.unsuccessful_sigmapos;
            }
            if (ph.sigma_exceeded) {
                r.status = RunStatus::sigma_exceeded;
                stop = true;
            } else {
                sigma = sigma_update(cfg.strategy, sigma, ph.sigma_tilde, alpha_lm(b), cfg);
                if (sigma > cfg.sigma_cap) {
                    r.status = RunStatus::sigma_exceeded;
                    stop = true;
                }
            }
        }
        r.ledger.push_back(std::move(rec));
        ++cnt.iterations;
        if (stop) {
            break;
        }
    }

    r.x_final = x;
    r.f_final = b.f;
    r.grad_norm_final = b.g.allFinite() ? b.g.norm() : std::numeric_limits<double>::infinity();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace almton
