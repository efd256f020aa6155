#include "almton/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace almton {

int SdpLayout::X(int i, int j) const {
    if (i > j) {
        std::swap(i, j);
    }
    return i * n - i * (i - 1) / 2 + (j - i);
}

std::string to_string(SdpStatus status) {
    switch (status) {
        case SdpStatus::minimizer_found: return "minimizer_found";
        case SdpStatus::no_local_min: return "no_local_min";
        case SdpStatus::solver_failure: return "solver_failure";
    }
    return "unknown";
}

namespace {

Matrix unit_sym(int size, int i, int j) {
    Matrix e = Matrix::Zero(size, size);
    e(i, j) = 1.0;
    e(j, i) = 1.0;
    return e;
}

}  // namespace

CubicSdp build_sdp(const CubicPoly& p) {
    p.validate();
    const int n = p.dim();
    CubicSdp sdp;
    sdp.layout.n = n;
    const SdpLayout& L = sdp.layout;
    const int nv = L.num_vars();
    const Matrix& Q = p.Q.dense();
    ConicProgram& prog = sdp.program;

    prog.objective = Vector::Zero(nv);
    for (int i = 0; i < n; ++i) {
        prog.objective(L.X(i, i)) = 0.5 * Q(i, i);
        for (int j = i + 1; j < n; ++j) {
            prog.objective(L.X(i, j)) = Q(i, j);
        }
        prog.objective(L.x(i)) = p.b(i);
    }
    prog.objective(L.y()) = 0.5;

    prog.eq_matrix = Matrix::Zero(2 * n, nv);
    prog.eq_rhs = Vector::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        const Matrix& Hi = p.H.slice(i).dense();
        const int stat = i;
        const int vdef = n + i;
        for (int j = 0; j < n; ++j) {
            prog.eq_matrix(stat, L.X(j, j)) = 0.5 * Hi(j, j);
            prog.eq_matrix(vdef, L.X(j, j)) = -Hi(j, j);
            for (int k = j + 1; k < n; ++k) {
                prog.eq_matrix(stat, L.X(j, k)) = Hi(j, k);
                prog.eq_matrix(vdef, L.X(j, k)) = -2.0 * Hi(j, k);
            }
            prog.eq_matrix(stat, L.x(j)) = Q(i, j);
            prog.eq_matrix(vdef, L.x(j)) = -Q(i, j);
        }
        prog.eq_matrix(vdef, L.v(i)) = 1.0;
        prog.eq_rhs(stat) = -p.b(i);
    }

    const int bs = n + 1;
    LmiBlock curvature;
    curvature.size = bs;
    curvature.constant = Matrix::Zero(bs, bs);
    curvature.constant.topLeftCorner(n, n) = Q;
    curvature.coeffs.assign(static_cast<std::size_t>(nv), Matrix::Zero(bs, bs));

    LmiBlock moment;
    moment.size = bs;
    moment.constant = Matrix::Zero(bs, bs);
    moment.constant(n, n) = 1.0;
    moment.coeffs.assign(static_cast<std::size_t>(nv), Matrix::Zero(bs, bs));

    for (int i = 0; i < n; ++i) {
        auto& cx = curvature.coeffs[static_cast<std::size_t>(L.x(i))];
        cx.topLeftCorner(n, n) = p.H.slice(i).dense();
        curvature.coeffs[static_cast<std::size_t>(L.v(i))] = unit_sym(bs, i, n);
        moment.coeffs[static_cast<std::size_t>(L.x(i))] = unit_sym(bs, i, n);
        for (int j = i; j < n; ++j) {
            moment.coeffs[static_cast<std::size_t>(L.X(i, j))] = unit_sym(bs, i, j);
        }
    }
    curvature.coeffs[static_cast<std::size_t>(L.y())] = unit_sym(bs, n, n);
    // unit_sym puts 1 on the diagonal once; the diagonal X entries need exactly 1.
    for (int i = 0; i < n; ++i) {
        moment.coeffs[static_cast<std::size_t>(L.X(i, i))](i, i) = 1.0;
    }
    curvature.coeffs[static_cast<std::size_t>(L.y())](n, n) = 1.0;

    prog.blocks = {std::move(curvature), std::move(moment)};
    return sdp;
}

Vector polish(const CubicPoly& p, const Vector& x0) {
    const double threshold = 1e-10 * std::max(1.0, p.b.norm());
    Vector x = x0;
    const double g0 = gradient(p, x).norm();
    for (int it = 0; it <= 20; ++it) {
        const Vector g = gradient(p, x);
        const double gn = g.norm();
        if (gn <= threshold) {
            return x;
        }
        if (it == 20 || !std::isfinite(gn) || gn > 1e6 * std::max(1.0, g0)) {
            break;
        }
        const Matrix hess = hessian(p, x).dense();
        Eigen::FullPivLU<Matrix> lu(hess);
        lu.setThreshold(1e-14);
        if (!lu.isInvertible()) {
            break;
        }
        const Vector step = lu.solve(g);
        if (!step.allFinite()) {
            break;
        }
        x -= step;
    }
    return x0;
}

CubicSubsolver::CubicSubsolver() : backend_(make_default_backend()) {}

CubicSubsolver::CubicSubsolver(std::unique_ptr<ConicBackend> backend) : backend_(std::move(backend)) {
    if (!backend_) {
        throw std::invalid_argument("CubicSubsolver: null backend");
    }
}

SdpOutcome CubicSubsolver::solve(const CubicPoly& p, double tol) {
    p.validate();
    if (!p.all_finite()) {
        throw std::invalid_argument("solve_cubic: non-finite polynomial data");
    }
    if (!(tol >= 1e-9 && tol <= 1e-2)) {
        throw std::invalid_argument("solve_cubic: tolerance must lie in [1e-9, 1e-2]");
    }
    SdpOutcome out = attempt(p, tol);
    const bool backend_decided = out.backend_status == ConicStatus::infeasible ||
                                 out.backend_status == ConicStatus::unbounded;
    if (out.status != SdpStatus::minimizer_found && !backend_decided && tol > 1e-8) {
        // A loose solve can leave x outside the Newton basin of the minimizer.
        out = attempt(p, 1e-8);
    }
    return out;
}

SdpOutcome CubicSubsolver::attempt(const CubicPoly& p, double tol) {
    const int n = p.dim();
    const CubicSdp sdp = build_sdp(p);
    ConicSettings settings;
    settings.tolerance = tol;
    const ConicSolution sol = backend_->solve(sdp.program, settings);

    SdpOutcome out;
    out.backend_status = sol.status;
    out.backend_iterations = sol.iterations;
    if (sol.status == ConicStatus::infeasible || sol.status == ConicStatus::unbounded) {
        out.status = SdpStatus::no_local_min;
        return out;
    }

    Vector x(n);
    for (int i = 0; i < n; ++i) {
        x(i) = sol.z(sdp.layout.x(i));
    }
    const Matrix& moment = sol.slacks[1];
    Eigen::SelfAdjointEigenSolver<Matrix> es(moment, Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    out.rank_gap = (ev.size() > 1 && top > 0.0) ? std::max(0.0, ev(ev.size() - 2)) / top : 0.0;

    if (!x.allFinite()) {
        out.status = SdpStatus::solver_failure;
        return out;
    }
    const Vector xp = polish(p, x);
    const SymMatrix hess = hessian(p, xp);
    out.kkt_grad_norm = gradient(p, xp).norm();
    out.kkt_min_eig = min_eigenvalue(hess);

    double scale = 1.0 + operator_norm(p.Q);
    for (int i = 0; i < n; ++i) {
        scale += operator_norm(p.H.slice(i));
    }
    const double kkt_tol = 1e-6 * std::max(1.0, p.b.norm());
    // A degenerate stationary point (zero curvature in some direction) makes
    // Newton converge only linearly, leaving lambda_min ~ sqrt(||grad||).
    const double strict_floor = std::max(1e-9 * scale, 100.0 * std::sqrt(out.kkt_grad_norm * scale));
    if (out.kkt_grad_norm <= kkt_tol && out.kkt_min_eig > strict_floor) {
        out.status = SdpStatus::minimizer_found;
        out.xbar = xp;
        return out;
    }
    out.status = sol.status == ConicStatus::numerical_error ? SdpStatus::solver_failure : SdpStatus::no_local_min;
    return out;
}

SdpOutcome solve_cubic(const CubicPoly& p, double tol) {
    CubicSubsolver solver;
    return solver.solve(p, tol);
}

}  // namespace almton
