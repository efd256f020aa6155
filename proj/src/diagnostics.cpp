#include "almton/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace almton {

TheoryBounds theory_constants(const std::array<double, 3>& lambda, std::optional<double> L_hat, int n,
                              const AlmtonConfig& cfg) {
    TheoryBounds tb;
    tb.Lambda = lambda;
    tb.L_hat = L_hat;
    tb.n = n;
    const double L = L_hat.value_or(0.0);
    tb.alpha_max = std::sqrt(3.0 * lambda[0] * std::sqrt(static_cast<double>(n)) * lambda[2]) + lambda[1];
    const double sigma_l = 16.0 * L * lambda[0] * lambda[0] / (cfg.c * cfg.c * 3.0 * (1.0 - cfg.eta));
    tb.sigma_max = std::max(tb.alpha_max, sigma_l);
    const double top = 2.0 * tb.sigma_max + L;
    tb.kappa_s = top * top / (cfg.eta * cfg.l);
    return tb;
}

TheoryBounds estimate_bounds(const RunResult& run, const Problem& problem, const AlmtonConfig& cfg) {
    std::vector<Vector> iterates;
    for (const IterationRecord& rec : run.ledger) {
        if (iterates.empty() || rec.x != iterates.back()) {
            iterates.push_back(rec.x);
        }
    }
    if (run.x_final.size() == problem.n && (iterates.empty() || run.x_final != iterates.back())) {
        iterates.push_back(run.x_final);
    }
    std::array<double, 3> lambda{0.0, 0.0, 0.0};
    std::optional<double> L_hat;
    ThirdTensor prev_t;
    for (std::size_t i = 0; i < iterates.size(); ++i) {
        const DerivativeBundle b = problem.bundle(iterates[i]);
        lambda[0] = std::max(lambda[0], b.g.norm());
        lambda[1] = std::max(lambda[1], operator_norm(b.H));
        lambda[2] = std::max(lambda[2], operator_norm(b.T));
        if (i > 0) {
            const double dist = (iterates[i] - iterates[i - 1]).norm();
            const double l = operator_norm(b.T - prev_t) / (2.0 * dist);
            L_hat = std::max(L_hat.value_or(0.0), l);
        }
        prev_t = b.T;
    }
    return theory_constants(lambda, L_hat, problem.n, cfg);
}

int AuditReport::count(char check) const {
    int c = 0;
    for (const AuditViolation& v : violations) {
        c += v.check == check ? 1 : 0;
    }
    return c;
}

bool AuditReport::clean(const std::string& checks) const {
    for (char ch : checks) {
        if (count(ch) > 0) {
            return false;
        }
    }
    return true;
}

AuditReport audit_run(const RunResult& run, const TheoryBounds& bounds, const AlmtonConfig& cfg) {
    AuditReport rep;
    rep.bounds = bounds;
    const double L = bounds.L_hat.value_or(0.0);
    const double step_cap = 4.0 * bounds.Lambda[0] / cfg.c;
    for (const IterationRecord& rec : run.ledger) {
        ++rep.iterations;
        if (rec.success) {
            ++rep.successes;
        } else if (rec.sigma == 0.0) {
            ++rep.unsuccessful_sigma0;
        }
        const double sn = std::isnan(rec.step_norm) ? 0.0 : rec.step_norm;
        if (sn > step_cap) {
            rep.violations.push_back({'a', rec.k, sn, step_cap});
        }
        if (rec.success && !std::isnan(rec.grad_norm_next)) {
            const double lower = std::min(1.0, rec.grad_norm_next / (2.0 * bounds.sigma_max + L)) - 1e-9;
            if (sn < lower) {
                rep.violations.push_back({'b', rec.k, sn, lower});
            }
        }
        if (!std::isnan(rec.sigma_tilde) && rec.sigma_tilde > bounds.sigma_max) {
            rep.violations.push_back({'c', rec.k, rec.sigma_tilde, bounds.sigma_max});
        }
    }
    const double K = bounds.sigma_max > 1.0 ? std::ceil(std::log(bounds.sigma_max) / std::log(cfg.gamma)) : 0.0;
    rep.complexity_K = static_cast<int>(K);
    const double allowed = (2.0 + K) * rep.successes + 1.0 + K;
    if (rep.iterations > allowed) {
        rep.violations.push_back({'d', -1, static_cast<double>(rep.iterations), allowed});
    }
    if (rep.unsuccessful_sigma0 > rep.successes + 1) {
        rep.violations.push_back(
            {'e', -1, static_cast<double>(rep.unsuccessful_sigma0), static_cast<double>(rep.successes + 1)});
    }
    return rep;
}

std::string AuditReport::text() const {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "Lambda1 %.6g  Lambda2 %.6g  Lambda3 %.6g\n", bounds.Lambda[0], bounds.Lambda[1],
                  bounds.Lambda[2]);
    os << buf;
    if (bounds.L_hat) {
        std::snprintf(buf, sizeof buf, "L_hat %.6g (unfolding-norm estimate, may over-estimate L)\n", *bounds.L_hat);
    } else {
        std::snprintf(buf, sizeof buf, "L_hat absent (fewer than two distinct iterates)\n");
    }
    os << buf;
    std::snprintf(buf, sizeof buf, "alpha_max %.6g  sigma_max %.6g  kappa_s %.6g\n", bounds.alpha_max,
                  bounds.sigma_max, bounds.kappa_s);
    os << buf;
    std::snprintf(buf, sizeof buf, "iterations %d  successes %d  unsuccessful(sigma=0) %d  K %d\n", iterations,
                  successes, unsuccessful_sigma0, complexity_K);
    os << buf;
    const char* names[] = {"(a) step upper bound", "(b) step lower bound", "(c) sigma upper bound",
                           "(d) iteration complexity", "(e) sigma=0 failures per batch"};
    for (int i = 0; i < 5; ++i) {
        const char ch = static_cast<char>('a' + i);
        std::snprintf(buf, sizeof buf, "%-32s %s (%d violations)\n", names[i], count(ch) == 0 ? "ok" : "VIOLATED",
                      count(ch));
        os << buf;
    }
    for (const AuditViolation& v : violations) {
        std::snprintf(buf, sizeof buf, "  check %c at k=%d: value %.6g bound %.6g\n", v.check, v.k, v.value, v.bound);
        os << buf;
    }
    return os.str();
}

std::string AuditReport::csv_rows(const std::string& run_id) const {
    std::ostringstream os;
    char buf[256];
    for (int i = 0; i < 5; ++i) {
        const char ch = static_cast<char>('a' + i);
        std::snprintf(buf, sizeof buf, "audit,%s,%c,summary,%d,0\n", run_id.c_str(), ch, count(ch));
        os << buf;
    }
    for (const AuditViolation& v : violations) {
        std::snprintf(buf, sizeof buf, "audit,%s,%c,%d,%.17g,%.17g\n", run_id.c_str(), v.check, v.k, v.value, v.bound);
        os << buf;
    }
    return os.str();
}

}  // namespace almton
