#include "almton/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace almton {

std::string to_string(ConicStatus status) {
    switch (status) {
        case ConicStatus::optimal: return "optimal";
        case ConicStatus::infeasible: return "infeasible";
        case ConicStatus::unbounded: return "unbounded";
        case ConicStatus::max_iterations: return "max_iterations";
        case ConicStatus::numerical_error: return "numerical_error";
    }
    return "unknown";
}

void ConicProgram::validate() const {
    const int n = num_vars();
    if (!objective.allFinite()) {
        throw std::invalid_argument("ConicProgram: non-finite objective");
    }
    if (eq_matrix.rows() > 0 && eq_matrix.cols() != n) {
        throw std::invalid_argument("ConicProgram: equality matrix has wrong column count");
    }
    if (eq_rhs.size() != eq_matrix.rows()) {
        throw std::invalid_argument("ConicProgram: equality right-hand side has wrong length");
    }
    if (!eq_matrix.allFinite() || !eq_rhs.allFinite()) {
        throw std::invalid_argument("ConicProgram: non-finite equality data");
    }
    for (const auto& blk : blocks) {
        if (blk.constant.rows() != blk.size || blk.constant.cols() != blk.size ||
            static_cast<int>(blk.coeffs.size()) != n) {
            throw std::invalid_argument("ConicProgram: malformed LMI block");
        }
        if (!blk.constant.allFinite()) {
            throw std::invalid_argument("ConicProgram: non-finite LMI data");
        }
        for (const auto& f : blk.coeffs) {
            if (f.rows() != blk.size || f.cols() != blk.size || !f.allFinite()) {
                throw std::invalid_argument("ConicProgram: malformed LMI coefficient");
            }
        }
    }
}

namespace {

using Blocks = std::vector<Matrix>;

double frob(const Blocks& a) {
    double s = 0.0;
    for (const auto& m : a) {
        s += m.squaredNorm();
    }
    return std::sqrt(s);
}

/// Tr(A B) for symmetric A.
double trace_prod(const Blocks& a, const Blocks& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i].cwiseProduct(b[i].transpose()).sum();
    }
    return s;
}

Blocks sym(const Blocks& a) {
    Blocks out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = 0.5 * (a[i] + a[i].transpose());
    }
    return out;
}

Blocks lincomb(double alpha, const Blocks& a, double beta, const Blocks& b) {
    Blocks out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = alpha * a[i] + beta * b[i];
    }
    return out;
}

Blocks product3(const Blocks& a, const Blocks& b, const Blocks& c) {
    Blocks out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * b[i] * c[i];
    }
    return out;
}

Blocks scaled_identity(const std::vector<int>& sizes, double t) {
    Blocks out;
    for (int s : sizes) {
        out.push_back(t * Matrix::Identity(s, s));
    }
    return out;
}

/// Reduced LMI problem: min c^T w + offset  s.t.  F0 + sum_k w_k F[k] >= 0.
struct LmiProblem {
    Blocks f0;
    std::vector<Blocks> f;
    Vector c;
    double offset = 0.0;
    std::vector<int> sizes;
    int total_size = 0;

    int m() const { return static_cast<int>(f.size()); }

    Blocks affine(const Vector& w) const {
        Blocks out = f0;
        for (int k = 0; k < m(); ++k) {
            for (std::size_t b = 0; b < out.size(); ++b) {
                out[b] += w(k) * f[static_cast<std::size_t>(k)][b];
            }
        }
        return out;
    }

    Blocks linear(const Vector& w) const {
        Blocks out = scaled_identity(sizes, 0.0);
        for (int k = 0; k < m(); ++k) {
            for (std::size_t b = 0; b < out.size(); ++b) {
                out[b] += w(k) * f[static_cast<std::size_t>(k)][b];
            }
        }
        return out;
    }

    Vector adjoint(const Blocks& x) const {
        Vector out(m());
        for (int k = 0; k < m(); ++k) {
            out(k) = trace_prod(f[static_cast<std::size_t>(k)], x);
        }
        return out;
    }
};

struct Reduction {
    Vector z0;
    Matrix basis;  // columns span the nullspace of the equality matrix
    bool consistent = true;
};

Reduction reduce_equalities(const ConicProgram& prog) {
    const int n = prog.num_vars();
    Reduction red;
    if (prog.num_equalities() == 0) {
        red.z0 = Vector::Zero(n);
        red.basis = Matrix::Identity(n, n);
        return red;
    }
    Eigen::JacobiSVD<Matrix> svd(prog.eq_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double thresh = smax * 1e-12 * static_cast<double>(std::max(prog.num_equalities(), n));
    int rank = 0;
    while (rank < sv.size() && sv(rank) > thresh) {
        ++rank;
    }
    const Matrix& U = svd.matrixU();
    const Matrix& V = svd.matrixV();
    Vector coeff = U.leftCols(rank).transpose() * prog.eq_rhs;
    for (int i = 0; i < rank; ++i) {
        coeff(i) /= sv(i);
    }
    red.z0 = V.leftCols(rank) * coeff;
    red.basis = V.rightCols(n - rank);
    const double resid = (prog.eq_matrix * red.z0 - prog.eq_rhs).norm();
    red.consistent = resid <= 1e-9 * (1.0 + prog.eq_rhs.norm());
    return red;
}

LmiProblem make_lmi(const ConicProgram& prog, const Reduction& red) {
    LmiProblem lmi;
    const int n = prog.num_vars();
    const int m = static_cast<int>(red.basis.cols());
    for (const auto& blk : prog.blocks) {
        lmi.sizes.push_back(blk.size);
        lmi.total_size += blk.size;
        Matrix f0 = blk.constant;
        for (int j = 0; j < n; ++j) {
            if (red.z0(j) != 0.0) {
                f0 += red.z0(j) * blk.coeffs[static_cast<std::size_t>(j)];
            }
        }
        lmi.f0.push_back(f0);
    }
    lmi.f.assign(static_cast<std::size_t>(m), Blocks{});
    for (int k = 0; k < m; ++k) {
        Blocks fk;
        for (const auto& blk : prog.blocks) {
            Matrix acc = Matrix::Zero(blk.size, blk.size);
            for (int j = 0; j < n; ++j) {
                const double coef = red.basis(j, k);
                if (coef != 0.0) {
                    acc += coef * blk.coeffs[static_cast<std::size_t>(j)];
                }
            }
            fk.push_back(acc);
        }
        lmi.f[static_cast<std::size_t>(k)] = std::move(fk);
    }
    lmi.c = red.basis.transpose() * prog.objective;
    lmi.offset = prog.objective.dot(red.z0);
    return lmi;
}

/// Largest step alpha with X + alpha dX PSD (infinity if dX keeps X PSD);
/// zero if X itself is not positive definite.
double max_step(const Blocks& x, const Blocks& dx) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < x.size(); ++b) {
        Eigen::LLT<Matrix> llt(x[b]);
        if (llt.info() != Eigen::Success) {
            return 0.0;
        }
        Matrix tmp = llt.matrixL().solve(dx[b]);
        tmp = llt.matrixL().solve(tmp.transpose().eval());
        const Matrix symm = 0.5 * (tmp + tmp.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(symm, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()(0);
        if (lmin < 0.0) {
            alpha = std::min(alpha, -1.0 / lmin);
        }
    }
    return alpha;
}

bool invert_pd(const Blocks& x, Blocks& inv) {
    inv.resize(x.size());
    for (std::size_t b = 0; b < x.size(); ++b) {
        Eigen::LLT<Matrix> llt(x[b]);
        if (llt.info() != Eigen::Success) {
            return false;
        }
        inv[b] = llt.solve(Matrix::Identity(x[b].rows(), x[b].cols()));
        inv[b] = 0.5 * (inv[b] + inv[b].transpose());
    }
    return true;
}

ConicSolution finish(const ConicProgram& prog, const Reduction& red, const Vector& w, ConicStatus status,
                     int iterations, double relp, double reld, double relgap) {
    ConicSolution sol;
    sol.status = status;
    sol.iterations = iterations;
    sol.z = red.z0 + red.basis * w;
    for (const auto& blk : prog.blocks) {
        Matrix s = blk.constant;
        for (int j = 0; j < prog.num_vars(); ++j) {
            s += sol.z(j) * blk.coeffs[static_cast<std::size_t>(j)];
        }
        sol.slacks.push_back(0.5 * (s + s.transpose()));
    }
    sol.primal_residual = relp;
    sol.dual_residual = reld;
    sol.gap = relgap;
    sol.objective = prog.objective.dot(sol.z);
    return sol;
}

}  // namespace

ConicSolution InteriorPointBackend::solve(const ConicProgram& program, const ConicSettings& settings) {
    program.validate();
    const Reduction red = reduce_equalities(program);
    if (!red.consistent) {
        return finish(program, red, Vector::Zero(red.basis.cols()), ConicStatus::infeasible, 0, 1.0, 0.0, 0.0);
    }
    const LmiProblem lmi = make_lmi(program, red);
    const int m = lmi.m();
    const double nt = static_cast<double>(lmi.total_size);

    double max_fk = 0.0;
    double ratio = 0.0;
    for (int k = 0; k < m; ++k) {
        const double nf = frob(lmi.f[static_cast<std::size_t>(k)]);
        max_fk = std::max(max_fk, nf);
        ratio = std::max(ratio, (1.0 + std::abs(lmi.c(k))) / (1.0 + nf));
    }
    const double norm_f0 = frob(lmi.f0);
    const double norm_c = lmi.c.norm();
    const double zeta_z = std::max({10.0, std::sqrt(nt), nt * ratio});
    const double zeta_s = std::max({10.0, std::sqrt(nt), max_fk, norm_f0});

    Vector w = Vector::Zero(m);
    Blocks S = scaled_identity(lmi.sizes, zeta_s);
    Blocks Z = scaled_identity(lmi.sizes, zeta_z);

    double relp = 1.0;
    double reld = 1.0;
    double relgap = 1.0;
    int stalls = 0;
    for (int it = 0; it < settings.max_iterations; ++it) {
        const Blocks fw = lmi.affine(w);
        const Blocks Rp = lincomb(1.0, fw, -1.0, S);
        const Vector rd = lmi.c - lmi.adjoint(Z);
        const double pobj = lmi.c.dot(w) + lmi.offset;
        const double dobj = -trace_prod(lmi.f0, Z) + lmi.offset;
        const double gap = trace_prod(Z, S);
        relp = frob(Rp) / (1.0 + norm_f0);
        reld = rd.norm() / (1.0 + norm_c);
        relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (relp <= settings.tolerance && reld <= settings.tolerance && relgap <= settings.tolerance) {
            return finish(program, red, w, ConicStatus::optimal, it, relp, reld, relgap);
        }
        // Certificate Z >= 0, A(Z) ~ 0, Tr(F0 Z) < 0 means the LMI is empty.
        const double t = -trace_prod(lmi.f0, Z);
        if (t > 0.0 && lmi.adjoint(Z).norm() <= 1e-8 * t) {
            return finish(program, red, w, ConicStatus::infeasible, it, relp, reld, relgap);
        }
        const double cw = lmi.c.dot(w);
        if (cw < 0.0 && -cw > 1e8 * (1.0 + norm_f0 + frob(Rp))) {
            return finish(program, red, w, ConicStatus::unbounded, it, relp, reld, relgap);
        }

        Blocks Sinv;
        if (!invert_pd(S, Sinv)) {
            return finish(program, red, w, ConicStatus::numerical_error, it, relp, reld, relgap);
        }
        // Schur complement M_ik = Tr(F_i Z F_k S^-1).
        std::vector<Blocks> G(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) {
            G[static_cast<std::size_t>(k)] = product3(Z, lmi.f[static_cast<std::size_t>(k)], Sinv);
        }
        Matrix M(m, m);
        for (int i = 0; i < m; ++i) {
            for (int k = i; k < m; ++k) {
                const double v = trace_prod(lmi.f[static_cast<std::size_t>(i)], G[static_cast<std::size_t>(k)]);
                M(i, k) = v;
                M(k, i) = v;
            }
        }
        Eigen::LLT<Matrix> chol(M);
        if (chol.info() != Eigen::Success) {
            const double reg = 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
            M.diagonal().array() += reg;
            chol.compute(M);
            if (chol.info() != Eigen::Success) {
                return finish(program, red, w, ConicStatus::numerical_error, it, relp, reld, relgap);
            }
        }

        const Blocks ZRpSinv = product3(Z, Rp, Sinv);
        auto direction = [&](double mu, const Blocks* corr, Vector& dw, Blocks& dS, Blocks& dZ) {
            // Target for Z + dZ before subtracting the dS coupling term.
            Blocks base = lincomb(mu, Sinv, -1.0, Z);
            Blocks rhs_mat = lincomb(1.0, base, -1.0, ZRpSinv);
            if (corr != nullptr) {
                rhs_mat = lincomb(1.0, rhs_mat, -1.0, *corr);
            }
            const Vector rhs = lmi.adjoint(rhs_mat) - rd;
            dw = chol.solve(rhs);
            dS = lincomb(1.0, Rp, 1.0, lmi.linear(dw));
            Blocks coupling = sym(product3(Z, dS, Sinv));
            dZ = lincomb(1.0, base, -1.0, coupling);
            if (corr != nullptr) {
                dZ = lincomb(1.0, dZ, -1.0, sym(*corr));
            }
        };

        Vector dw_a;
        Blocks dS_a;
        Blocks dZ_a;
        direction(0.0, nullptr, dw_a, dS_a, dZ_a);
        const double ap_a = std::min(1.0, max_step(S, dS_a));
        const double ad_a = std::min(1.0, max_step(Z, dZ_a));
        const double gap_a = trace_prod(lincomb(1.0, Z, ad_a, dZ_a), lincomb(1.0, S, ap_a, dS_a));
        const double expo = std::max(1.0, 3.0 * std::min(ap_a, ad_a) * std::min(ap_a, ad_a));
        const double center = std::clamp(std::pow(std::max(gap_a, 0.0) / gap, expo), 0.0, 1.0);
        const double mu = center * gap / nt;

        const Blocks corr = product3(dZ_a, dS_a, Sinv);
        Vector dw;
        Blocks dS;
        Blocks dZ;
        direction(mu, &corr, dw, dS, dZ);
        const double frac = 0.9 + 0.09 * std::min(ap_a, ad_a);
        const double ap = std::min(1.0, frac * max_step(S, dS));
        const double ad = std::min(1.0, frac * max_step(Z, dZ));
        if (!(ap > 0.0) || !(ad > 0.0) || !dw.allFinite()) {
            return finish(program, red, w, ConicStatus::numerical_error, it, relp, reld, relgap);
        }
        w += ap * dw;
        S = lincomb(1.0, S, ap, dS);
        Z = lincomb(1.0, Z, ad, dZ);
        stalls = (std::max(ap, ad) < 1e-8) ? stalls + 1 : 0;
        if (stalls >= 3) {
            return finish(program, red, w, ConicStatus::numerical_error, it + 1, relp, reld, relgap);
        }
    }
    return finish(program, red, w, ConicStatus::max_iterations, settings.max_iterations, relp, reld, relgap);
}

std::unique_ptr<ConicBackend> make_default_backend() { return std::make_unique<InteriorPointBackend>(); }

}  // namespace almton
