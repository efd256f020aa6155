#include "almton/baselines.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace almton {

void BaselineConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("armijo must lie in (0, 1)");
    if (!(contraction > 0.0 && contraction < 1.0)) throw std::invalid_argument("contraction must lie in (0, 1)");
    if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be at least 1");
    if (cg_max_iter < 0) throw std::invalid_argument("cg_max_iter must be nonnegative");
    if (!(sigma0 > 0.0 && sigma_min > 0.0)) throw std::invalid_argument("sigma0 and sigma_min must be positive");
    if (!(cr_eta > 0.0 && cr_eta < 1.0)) throw std::invalid_argument("cr_eta must lie in (0, 1)");
    if (!(cr_gamma > 1.0)) throw std::invalid_argument("cr_gamma must exceed 1");
    if (lbfgs_memory < 1) throw std::invalid_argument("lbfgs_memory must be at least 1");
    if (!(wolfe_c2 > armijo && wolfe_c2 < 1.0)) throw std::invalid_argument("wolfe_c2 must lie in (armijo, 1)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared bookkeeping: counted evaluations and the convergence test that opens
// every iteration.
class Tracker {
public:
    Tracker(const Problem& f, const Vector& x0, const BaselineConfig& cfg, std::string solver)
        : f_(f), cfg_(cfg), t0_(std::chrono::steady_clock::now()) {
        cfg.validate();
        if (x0.size() != f.n) {
            throw std::invalid_argument(solver + ": start point dimension does not match the problem");
        }
        r.solver = std::move(solver);
    }

    DerivativeBundle eval(const Vector& x, int order) {
        ++r.counts.f_evals;
        if (order >= 1) {
            ++r.counts.derivative_evals;
        }
        return f_.evaluate(x, order);
    }

    double value(const Vector& x) {
        ++r.counts.f_evals;
        return f_.value(x);
    }

    // Returns true when the run must stop before iteration k.
    bool should_stop(int k, const DerivativeBundle& b) {
        if (!std::isfinite(b.f) || !b.g.allFinite()) {
            r.status = RunStatus::diverged;
            return true;
        }
        if (b.g.norm() <= cfg_.epsilon) {
            r.status = RunStatus::converged;
            return true;
        }
        if (k >= cfg_.max_iter) {
            r.status = RunStatus::max_iterations_exceeded;
            return true;
        }
        return false;
    }

    IterationRecord open(int k, const DerivativeBundle& b) const {
        IterationRecord rec;
        rec.k = k;
        rec.x = b.x;
        rec.f = b.f;
        rec.grad_norm = b.g.norm();
        return rec;
    }

    void push(IterationRecord rec) {
        if (rec.success) {
            ++r.counts.successful;
        } else {
            ++r.counts.unsuccessful_sigmapos;
        }
        r.ledger.push_back(std::move(rec));
        ++r.counts.iterations;
    }

    RunResult finish(const DerivativeBundle& b) {
        r.x_final = b.x;
        r.f_final = b.f;
        r.grad_norm_final = b.g.size() > 0 && b.g.allFinite() ? b.g.norm() : kInf;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        return std::move(r);
    }

    RunResult r;

private:
    const Problem& f_;
    const BaselineConfig& cfg_;
    std::chrono::steady_clock::time_point t0_;
};

// Armijo backtracking along d. Returns the accepted step length or 0.
double armijo_search(Tracker& t, const DerivativeBundle& b, const Vector& d, const BaselineConfig& cfg,
                     double& f_new) {
    const double slope = b.g.dot(d);
    double step = 1.0;
    for (int i = 0; i < cfg.max_backtracks; ++i) {
        f_new = t.value(b.x + step * d);
        if (std::isfinite(f_new) && f_new <= b.f + cfg.armijo * step * slope) {
            return step;
        }
        step *= cfg.contraction;
    }
    return 0.0;
}

// Shared tail of the line-search Newton methods.
bool line_search_step(Tracker& t, DerivativeBundle& b, IterationRecord& rec, const Vector& d,
                      const BaselineConfig& cfg, int order) {
    double f_new = kInf;
    const double step = armijo_search(t, b, d, cfg, f_new);
    if (step == 0.0) {
        rec.success = false;
        t.push(std::move(rec));
        t.r.message = "line search failed";
        return false;
    }
    rec.step = step * d;
    rec.step_norm = rec.step.norm();
    rec.f_trial = f_new;
    rec.success = true;
    b = t.eval(b.x + rec.step, order);
    rec.grad_norm_next = b.g.norm();
    t.push(std::move(rec));
    return true;
}

}  // namespace

RunResult gradient_descent(const Problem& f, const Vector& x0, const BaselineConfig& cfg) {
    Tracker t(f, x0, cfg, "gd");
    DerivativeBundle b = t.eval(x0, 1);
    for (int k = 0; !t.should_stop(k, b); ++k) {
        IterationRecord rec = t.open(k, b);
        rec.step = -cfg.alpha * b.g;
        rec.step_norm = rec.step.norm();
        rec.success = true;
        b = t.eval(b.x + rec.step, 1);
        rec.f_trial = b.f;
        rec.grad_norm_next = b.g.allFinite() ? b.g.norm() : kInf;
        t.push(std::move(rec));
    }
    return t.finish(b);
}

RunResult damped_newton(const Problem& f, const Vector& x0, const BaselineConfig& cfg) {
    Tracker t(f, x0, cfg, "newton");
    DerivativeBundle b = t.eval(x0, 2);
    for (int k = 0; !t.should_stop(k, b); ++k) {
        IterationRecord rec = t.open(k, b);
        const Matrix& H = b.H.dense();
        if (!H.allFinite()) {
            t.r.status = RunStatus::diverged;
            break;
        }
        rec.lambda_min_hk = min_eigenvalue(b.H);
        const int n = b.dim();
        Vector d;
        Eigen::LLT<Matrix> llt(H);
        if (llt.info() == Eigen::Success) {
            d = -llt.solve(b.g);
        }
        if (d.size() == 0 || !d.allFinite() || !(b.g.dot(d) < 0.0)) {
            rec.subsolver_status = "shifted";
            double lam = std::max(1e-8, -rec.lambda_min_hk + 1e-4 * std::max(1.0, std::abs(rec.lambda_min_hk)));
            for (int i = 0; i < 60; ++i, lam *= 10.0) {
                Eigen::LLT<Matrix> shifted(H + lam * Matrix::Identity(n, n));
                if (shifted.info() != Eigen::Success) {
                    continue;
                }
                d = -shifted.solve(b.g);
                if (d.allFinite() && b.g.dot(d) < 0.0) {
                    rec.sigma = lam;
                    break;
                }
            }
        }
        if (!line_search_step(t, b, rec, d, cfg, 2)) {
            break;
        }
    }
    return t.finish(b);
}

RunResult newton_cg(const Problem& f, const Vector& x0, const BaselineConfig& cfg) {
    Tracker t(f, x0, cfg, "newton-cg");
    DerivativeBundle b = t.eval(x0, 2);
    const int cg_max = cfg.cg_max_iter > 0 ? cfg.cg_max_iter : 2 * f.n;
    for (int k = 0; !t.should_stop(k, b); ++k) {
        IterationRecord rec = t.open(k, b);
        const Matrix& H = b.H.dense();
        if (!H.allFinite()) {
            t.r.status = RunStatus::diverged;
            break;
        }
        const double gn = b.g.norm();
        const double tol = std::min(0.5, std::sqrt(gn)) * gn;
        Vector z = Vector::Zero(b.dim());
        Vector r = b.g;
        Vector p = -r;
        Vector d = -b.g;
        int j = 0;
        for (; j < cg_max; ++j) {
            const Vector hp = H * p;
            const double curv = p.dot(hp);
            if (curv <= 0.0) {
                rec.subsolver_status = "negative_curvature";
                d = j == 0 ? Vector(-b.g) : z;
                break;
            }
            const double rr = r.dot(r);
            const double a = rr / curv;
            z += a * p;
            r += a * hp;
            d = z;
            if (r.norm() <= tol) {
                break;
            }
            p = -r + (r.dot(r) / rr) * p;
        }
        rec.inner_count = j + 1;
        if (!(b.g.dot(d) < 0.0)) {
            d = -b.g;
        }
        if (!line_search_step(t, b, rec, d, cfg, 2)) {
            break;
        }
    }
    return t.finish(b);
}

RunResult unregularized_third_order(const Problem& f, const Vector& x0, const BaselineConfig& cfg) {
    CubicSubsolver solver;
    return unregularized_third_order(f, x0, cfg, solver);
}

RunResult unregularized_third_order(const Problem& f, const Vector& x0, const BaselineConfig& cfg,
                                    CubicSubsolver& solver) {
    Tracker t(f, x0, cfg, "third-order");
    DerivativeBundle b = t.eval(x0, 3);
    for (int k = 0; !t.should_stop(k, b); ++k) {
        IterationRecord rec = t.open(k, b);
        const double gn = b.g.norm();
        const double tol = gn > cfg.sdp_tol_switch ? cfg.sdp_tol_loose : cfg.sdp_tol_tight;
        SdpOutcome o;
        try {
            o = solver.solve(from_bundle(b), tol);
        } catch (const std::exception& e) {
            t.r.status = RunStatus::subsolver_error;
            t.r.message = e.what();
            break;
        }
        ++t.r.counts.sdp_solves;
        rec.inner_count = 1;
        rec.sigma_tilde = 0.0;
        rec.subsolver_status = to_string(o.status);
        if (o.status != SdpStatus::minimizer_found) {
            t.push(std::move(rec));
            t.r.status = RunStatus::sdp_fail;
            break;
        }
        rec.step = o.xbar;
        rec.step_norm = o.xbar.norm();
        rec.success = true;
        b = t.eval(b.x + o.xbar, 3);
        rec.f_trial = b.f;
        rec.grad_norm_next = b.g.allFinite() ? b.g.norm() : kInf;
        t.push(std::move(rec));
    }
    return t.finish(b);
}

Vector cubic_regularized_step(const Vector& g, const SymMatrix& H, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("cubic_regularized_step: sigma must be positive");
    }
    const int n = static_cast<int>(g.size());
    Eigen::SelfAdjointEigenSolver<Matrix> es(H.dense());
    const Vector lam = es.eigenvalues();
    const Matrix& V = es.eigenvectors();
    const Vector gt = V.transpose() * g;
    const double l1 = lam(0);
    const double lo = std::max(0.0, -l1);
    const double scale = std::max({1.0, lam.cwiseAbs().maxCoeff(), g.norm()});

    // Components aligned with the leftmost eigenspace and carrying no gradient
    // make the secular function finite at lo: the hard case.
    std::vector<bool> degenerate(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        degenerate[static_cast<std::size_t>(i)] =
            std::abs(lam(i) - l1) <= 1e-12 * scale && std::abs(gt(i)) <= 1e-14 * scale;
    }
    auto norm_at = [&](double mu, bool skip_degenerate) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            if (skip_degenerate && degenerate[static_cast<std::size_t>(i)]) {
                continue;
            }
            const double q = gt(i) / (lam(i) + mu);
            acc += q * q;
        }
        return std::sqrt(acc);
    };
    auto step_at = [&](double mu, bool skip_degenerate) {
        Vector st = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (skip_degenerate && degenerate[static_cast<std::size_t>(i)]) {
                continue;
            }
            st(i) = -gt(i) / (lam(i) + mu);
        }
        return st;
    };

    if (l1 < 0.0 && degenerate[0]) {
        const double base = norm_at(lo, true);
        const double target = lo / sigma;
        if (base <= target) {
            Vector st = step_at(lo, true);
            st(0) = std::sqrt(std::max(0.0, target * target - base * base));
            return V * st;
        }
    }
    if (g.norm() == 0.0) {
        return Vector::Zero(n);
    }

    // phi(mu) = ||s(mu)|| - mu / sigma is decreasing on (lo, inf).
    double a = lo;
    double b = lo + 1.0;
    while (norm_at(b, false) - b / sigma > 0.0) {
        a = b;
        b = lo + 2.0 * (b - lo);
    }
    for (int it = 0; it < 300 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        const double mid = 0.5 * (a + b);
        if (norm_at(mid, false) - mid / sigma > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return V * step_at(b, false);
}

RunResult cubic_regularized_newton(const Problem& f, const Vector& x0, const BaselineConfig& cfg) {
    Tracker t(f, x0, cfg, "cubic-reg");
    DerivativeBundle b = t.eval(x0, 2);
    double sigma = cfg.sigma0;
    for (int k = 0; !t.should_stop(k, b); ++k) {
        IterationRecord rec = t.open(k, b);
        if (!b.H.dense().allFinite()) {
            t.r.status = RunStatus::diverged;
            break;
        }
        rec.sigma = sigma;
        rec.sigma_tilde = sigma;
        rec.lambda_min_hk = min_eigenvalue(b.H);
        const Vector s = cubic_regularized_step(b.g, b.H, sigma);
        const double sn = s.norm();
        const double model = b.g.dot(s) + 0.5 * s.dot(b.H.dense() * s) + sigma / 3.0 * sn * sn * sn;
        rec.step = s;
        rec.step_norm = sn;
        rec.model_decrease = -model;
        rec.f_trial = t.value(b.x + s);
        rec.rho = -model > 0.0 && std::isfinite(rec.f_trial) ? (b.f - rec.f_trial) / -model : -kInf;
        rec.success = rec.rho >= cfg.cr_eta;
        if (rec.success) {
            b = t.eval(b.x + s, 2);
            rec.grad_norm_next = b.g.allFinite() ? b.g.norm() : kInf;
            sigma = std::max(sigma / cfg.cr_gamma, cfg.sigma_min);
        } else {
            sigma *= cfg.cr_gamma;
        }
        t.push(std::move(rec));
        if (!std::isfinite(sigma)) {
            t.r.status = RunStatus::sigma_exceeded;
            break;
        }
    }
    return t.finish(b);
}

namespace {

struct LinePoint {
    double a = 0.0;
    double f = 0.0;
    double slope = 0.0;
    DerivativeBundle bundle;
};

// Strong Wolfe line search (bracketing then zoom). Returns false on failure.
bool wolfe_search(Tracker& t, const DerivativeBundle& b, const Vector& d, double a0, const BaselineConfig& cfg,
                  LinePoint& out) {
    const double f0 = b.f;
    const double s0 = b.g.dot(d);
    auto probe = [&](double a) {
        LinePoint p;
        p.a = a;
        p.bundle = t.eval(b.x + a * d, 1);
        p.f = p.bundle.f;
        p.slope = p.bundle.g.allFinite() ? p.bundle.g.dot(d) : kInf;
        return p;
    };
    auto armijo_ok = [&](const LinePoint& p) { return std::isfinite(p.f) && p.f <= f0 + cfg.armijo * p.a * s0; };
    auto curvature_ok = [&](const LinePoint& p) { return std::abs(p.slope) <= -cfg.wolfe_c2 * s0; };

    auto zoom = [&](LinePoint lo, LinePoint hi) {
        for (int i = 0; i < 30; ++i) {
            // Quadratic interpolation from lo's value and slope and hi's value,
            // kept away from the bracket ends.
            const double width = hi.a - lo.a;
            double a = lo.a - lo.slope * width * width / (2.0 * (hi.f - lo.f - lo.slope * width));
            const double lo_end = std::min(lo.a, hi.a);
            const double hi_end = std::max(lo.a, hi.a);
            const double margin = 0.1 * (hi_end - lo_end);
            if (!std::isfinite(a) || a < lo_end + margin || a > hi_end - margin) {
                a = 0.5 * (lo.a + hi.a);
            }
            LinePoint p = probe(a);
            if (!armijo_ok(p) || p.f >= lo.f) {
                hi = p;
            } else {
                if (curvature_ok(p)) {
                    out = p;
                    return true;
                }
                if (p.slope * (hi.a - lo.a) >= 0.0) {
                    hi = lo;
                }
                lo = p;
            }
            if (std::abs(hi.a - lo.a) < 1e-16 * std::max(1.0, std::abs(lo.a))) {
                break;
            }
        }
        // Accept a sufficient-decrease point even if curvature never held.
        if (lo.a > 0.0) {
            out = lo;
            return true;
        }
        return false;
    };

    LinePoint prev;
    prev.a = 0.0;
    prev.f = f0;
    prev.slope = s0;
    prev.bundle = b;
    double a = a0;
    for (int i = 0; i < 30; ++i) {
        LinePoint p = probe(a);
        if (!armijo_ok(p) || (i > 0 && p.f >= prev.f)) {
            return zoom(prev, p);
        }
        if (curvature_ok(p)) {
            out = p;
            return true;
        }
        if (p.slope >= 0.0) {
            return zoom(p, prev);
        }
        prev = p;
        a *= 2.0;
    }
    return false;
}

}  // namespace

RunResult lbfgs(const Problem& f, const Vector& x0, const BaselineConfig& cfg) {
    Tracker t(f, x0, cfg, "lbfgs");
    DerivativeBundle b = t.eval(x0, 1);
    std::deque<std::pair<Vector, Vector>> memory;
    for (int k = 0; !t.should_stop(k, b); ++k) {
        IterationRecord rec = t.open(k, b);
        Vector q = b.g;
        std::vector<double> alphas(memory.size());
        for (std::size_t i = memory.size(); i-- > 0;) {
            const auto& [s, y] = memory[i];
            alphas[i] = s.dot(q) / y.dot(s);
            q -= alphas[i] * y;
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            q *= s.dot(y) / y.dot(y);
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const auto& [s, y] = memory[i];
            const double beta = y.dot(q) / y.dot(s);
            q += (alphas[i] - beta) * s;
        }
        Vector d = -q;
        if (!(b.g.dot(d) < 0.0)) {
            d = -b.g;
            memory.clear();
        }
        const double a0 = memory.empty() ? std::min(1.0, 1.0 / b.g.norm()) : 1.0;
        LinePoint p;
        bool ok = wolfe_search(t, b, d, a0, cfg, p);
        if (!ok && !memory.empty()) {
            memory.clear();
            d = -b.g;
            ok = wolfe_search(t, b, d, std::min(1.0, 1.0 / b.g.norm()), cfg, p);
        }
        if (!ok) {
            t.push(std::move(rec));
            t.r.message = "line search failed";
            break;
        }
        rec.step = p.a * d;
        rec.step_norm = rec.step.norm();
        rec.f_trial = p.f;
        rec.success = true;
        const Vector y = p.bundle.g - b.g;
        if (rec.step.dot(y) > 1e-12 * rec.step_norm * y.norm()) {
            memory.emplace_back(rec.step, y);
            if (static_cast<int>(memory.size()) > cfg.lbfgs_memory) {
                memory.pop_front();
            }
        }
        b = std::move(p.bundle);
        rec.grad_norm_next = b.g.norm();
        t.push(std::move(rec));
    }
    return t.finish(b);
}

}  // namespace almton
