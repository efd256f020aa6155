#include "almton/almton.hpp"
#include "almton/bench.hpp"
#include "almton/config.hpp"
#include "almton/diagnostics.hpp"
#include "almton/sdp.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>

namespace py = pybind11;
using namespace almton;

namespace {

ThirdTensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(0) != a.shape(1) || a.shape(1) != a.shape(2)) {
        throw std::invalid_argument("tensor must have shape (n, n, n)");
    }
    auto r = a.unchecked<3>();
    return ThirdTensor::from_generator(static_cast<int>(a.shape(0)), [&](int i, int j, int k) { return r(i, j, k); });
}

py::array_t<double> tensor_to_array(const ThirdTensor& t) {
    const int n = t.dim();
    py::array_t<double> out({n, n, n});
    auto w = out.mutable_unchecked<3>();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) w(i, j, k) = t(i, j, k);
    return out;
}

SolverOptions options(double epsilon, int budget, const std::map<std::string, std::string>& settings) {
    SolverOptions opts;
    opts.epsilon = epsilon;
    opts.budget = budget;
    KeyValueConfig kv;
    for (const auto& [k, v] : settings) kv.set(k, v);
    const auto unknown = kv.unknown_keys(solver_setting_keys());
    if (!unknown.empty()) throw std::invalid_argument("unknown setting '" + unknown.front() + "'");
    apply_solver_settings(kv, opts);
    return opts;
}

py::dict run_to_dict(const RunResult& r, bool with_ledger) {
    py::dict d;
    d["solver"] = r.solver;
    d["status"] = to_string(r.status);
    d["converged"] = r.status == RunStatus::converged;
    d["x"] = r.x_final;
    d["f"] = r.f_final;
    d["grad_norm"] = r.grad_norm_final;
    d["iterations"] = r.counts.iterations;
    d["successful"] = r.counts.successful;
    d["f_evals"] = r.counts.f_evals;
    d["derivative_evals"] = r.counts.derivative_evals;
    d["sdp_solves"] = r.counts.sdp_solves;
    d["seconds"] = r.seconds;
    if (with_ledger) {
        py::list rows;
        for (const auto& it : r.ledger) {
            py::dict row;
            row["k"] = it.k;
            row["x"] = it.x;
            row["f"] = it.f;
            row["grad_norm"] = it.grad_norm;
            row["sigma"] = it.sigma;
            row["sigma_tilde"] = it.sigma_tilde;
            row["step_norm"] = it.step_norm;
            row["success"] = it.success;
            row["rho"] = it.rho;
            row["inner_count"] = it.inner_count;
            row["f_trial"] = it.f_trial;
            row["lambda_bar"] = it.lambda_bar;
            rows.append(row);
        }
        d["ledger"] = rows;
    }
    return d;
}

Vector start_or_default(const Problem& p, const std::optional<Vector>& x0) {
    if (!x0) return p.standard_start;
    if (x0->size() != p.n) throw std::invalid_argument("x0 has the wrong dimension for " + p.name);
    return *x0;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive Levenberg-Marquardt third-order Newton method";

    m.def("problem_names", &problem_names);
    m.def("solver_ids", &solver_ids);
    m.def("setting_keys", &solver_setting_keys);

    m.def(
        "evaluate",
        [](const std::string& problem, const Vector& x) {
            const Problem p = make_problem(problem);
            const DerivativeBundle b = p.bundle(x);
            py::dict d;
            d["f"] = b.f;
            d["g"] = b.g;
            d["H"] = b.H.dense();
            d["T"] = tensor_to_array(b.T);
            return d;
        },
        py::arg("problem"), py::arg("x"));

    m.def(
        "problem_info",
        [](const std::string& problem) {
            const Problem p = make_problem(problem);
            py::dict d;
            d["name"] = p.name;
            d["n"] = p.n;
            d["lo"] = p.lo;
            d["hi"] = p.hi;
            d["standard_start"] = p.standard_start;
            d["known_minimizers"] = p.known_minimizers;
            d["approximate"] = p.approximate;
            return d;
        },
        py::arg("problem"));

    m.def(
        "solve",
        [](const std::string& solver, const std::string& problem, const std::optional<Vector>& x0, double epsilon,
           int budget, const std::map<std::string, std::string>& settings, bool ledger) {
            const Problem p = make_problem(problem);
            const Vector start = start_or_default(p, x0);
            const SolverSpec spec = make_solver(solver, options(epsilon, budget, settings));
            RunResult r;
            {
                py::gil_scoped_release release;
                r = spec.run(p, start);
            }
            return run_to_dict(r, ledger);
        },
        py::arg("solver"), py::arg("problem"), py::arg("x0") = py::none(), py::arg("epsilon") = 1e-8,
        py::arg("budget") = 100, py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("ledger") = false);

    m.def(
        "minimize_cubic",
        [](const Vector& b, const Matrix& Q, const py::array_t<double, py::array::c_style | py::array::forcecast>& H,
           double c, double tol) {
            CubicPoly p;
            p.c = c;
            p.b = b;
            p.Q = SymMatrix(Q);
            p.H = tensor_from_array(H);
            p.validate();
            const SdpOutcome out = solve_cubic(p, tol);
            py::dict d;
            d["status"] = to_string(out.status);
            d["x"] = out.status == SdpStatus::minimizer_found ? py::cast(out.xbar) : py::none();
            d["value"] = out.status == SdpStatus::minimizer_found ? py::cast(eval(p, out.xbar)) : py::none();
            d["kkt_grad_norm"] = out.kkt_grad_norm;
            d["kkt_min_eig"] = out.kkt_min_eig;
            d["rank_gap"] = out.rank_gap;
            return d;
        },
        py::arg("b"), py::arg("Q"), py::arg("H"), py::arg("c") = 0.0, py::arg("tol") = 1e-8);

    m.def(
        "check_derivatives",
        [](const std::string& problem, const Vector& x, double h) {
            const Problem p = make_problem(problem);
            const FdReport r = fd_check(p.bundle(x), [&](const Vector& y) { return p.bundle(y); }, h);
            py::dict d;
            d["gradient"] = r.gradient;
            d["hessian"] = r.hessian;
            d["tensor"] = r.tensor;
            return d;
        },
        py::arg("problem"), py::arg("x"), py::arg("h") = 1e-5);

    m.def(
        "audit",
        [](const std::string& problem, const std::optional<Vector>& x0, const std::string& strategy, double epsilon,
           int budget, const std::map<std::string, std::string>& settings) {
            const Problem p = make_problem(problem);
            const Vector start = start_or_default(p, x0);
            SolverOptions opts = options(epsilon, budget, settings);
            AlmtonConfig cfg = opts.almton;
            cfg.epsilon = epsilon;
            cfg.max_iter = budget;
            cfg.strategy = parse_strategy(strategy);
            cfg.validate();
            const RunResult r = run(p, start, cfg);
            const AuditReport rep = audit_run(r, estimate_bounds(r, p, cfg), cfg);
            py::dict d;
            d["status"] = to_string(r.status);
            d["iterations"] = rep.iterations;
            d["successes"] = rep.successes;
            d["sigma_max"] = rep.bounds.sigma_max;
            d["alpha_max"] = rep.bounds.alpha_max;
            d["L_hat"] = rep.bounds.L_hat ? py::cast(*rep.bounds.L_hat) : py::none();
            d["K"] = rep.complexity_K;
            py::dict counts;
            for (char ch : std::string("abcde")) counts[py::str(std::string(1, ch))] = rep.count(ch);
            d["violations"] = counts;
            d["report"] = rep.text();
            return d;
        },
        py::arg("problem"), py::arg("x0") = py::none(), py::arg("strategy") = "simple", py::arg("epsilon") = 1e-8,
        py::arg("budget") = 100, py::arg("settings") = std::map<std::string, std::string>{});

    m.def(
        "performance_profile",
        [](const py::list& records) {
            std::vector<TrialRecord> recs;
            for (const auto& item : records) {
                const auto d = item.cast<py::dict>();
                TrialRecord r;
                r.problem = d["problem"].cast<std::string>();
                r.start = d["start"].cast<Vector>();
                r.solver = d["solver"].cast<std::string>();
                r.success = d["success"].cast<bool>();
                r.metric = r.success ? d["metric"].cast<double>() : INFINITY;
                recs.push_back(std::move(r));
            }
            py::dict out;
            for (const auto& c : performance_profile(recs)) {
                py::dict curve;
                curve["ratios"] = c.ratios;
                curve["tau"] = c.tau;
                curve["rho"] = c.rho;
                out[py::str(c.solver)] = curve;
            }
            return out;
        },
        py::arg("records"),
        "records: dicts with problem, start, solver, success and metric. Returns solver -> {ratios, tau, rho}.");
}
