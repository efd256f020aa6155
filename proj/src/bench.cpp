#include "almton/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace almton {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    if (s.empty()) {
        throw std::runtime_error("empty numeric field");
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw std::runtime_error("bad numeric field '" + s + "'");
    }
    return v;
}

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool record_less(const TrialRecord& a, const TrialRecord& b) {
    if (a.problem != b.problem) return a.problem < b.problem;
    if (a.start.size() != b.start.size()) return a.start.size() < b.start.size();
    for (Eigen::Index i = 0; i < a.start.size(); ++i) {
        if (a.start(i) != b.start(i)) return a.start(i) < b.start(i);
    }
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.solver < b.solver;
}

}  // namespace

SolverSpec make_solver(const std::string& id, const SolverOptions& opts) {
    AlmtonConfig ac = opts.almton;
    ac.epsilon = opts.epsilon;
    ac.max_iter = opts.budget;
    BaselineConfig bc = opts.baseline;
    bc.epsilon = opts.epsilon;
    bc.max_iter = opts.budget;
    if (id == "almton-simple" || id == "almton-heuristic") {
        ac.strategy = id == "almton-simple" ? Strategy::simple : Strategy::heuristic;
        ac.validate();
        return {id, [ac](const Problem& p, const Vector& x0) { return run(p, x0, ac); }};
    }
    bc.validate();
    if (id == "gd") return {id, [bc](const Problem& p, const Vector& x0) { return gradient_descent(p, x0, bc); }};
    if (id == "newton") return {id, [bc](const Problem& p, const Vector& x0) { return damped_newton(p, x0, bc); }};
    if (id == "newton-cg") return {id, [bc](const Problem& p, const Vector& x0) { return newton_cg(p, x0, bc); }};
    if (id == "third-order") {
        return {id, [bc](const Problem& p, const Vector& x0) { return unregularized_third_order(p, x0, bc); }};
    }
    if (id == "cubic-reg") {
        return {id, [bc](const Problem& p, const Vector& x0) { return cubic_regularized_newton(p, x0, bc); }};
    }
    if (id == "lbfgs") return {id, [bc](const Problem& p, const Vector& x0) { return lbfgs(p, x0, bc); }};
    throw std::invalid_argument("unknown solver '" + id + "'");
}

std::vector<std::string> solver_ids() {
    return {"almton-simple", "almton-heuristic", "gd", "newton", "newton-cg", "third-order", "cubic-reg", "lbfgs"};
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::iterations: return "iterations";
        case Metric::f_evals: return "f_evals";
        case Metric::seconds: return "seconds";
    }
    return "unknown";
}

Metric parse_metric(const std::string& name) {
    if (name == "iterations") return Metric::iterations;
    if (name == "f_evals") return Metric::f_evals;
    if (name == "seconds") return Metric::seconds;
    throw std::invalid_argument("unknown metric '" + name + "' (expected iterations, f_evals or seconds)");
}

void GridSpec::validate(int n) const {
    if (static_cast<int>(counts.size()) != n) {
        throw std::invalid_argument("grid counts must give one entry per coordinate");
    }
    for (int c : counts) {
        if (c < 2) throw std::invalid_argument("grid counts must be at least 2");
    }
    if (lo.size() != 0 || hi.size() != 0) {
        if (lo.size() != n || hi.size() != n) throw std::invalid_argument("grid box dimension mismatch");
        for (int i = 0; i < n; ++i) {
            if (!(lo(i) < hi(i))) throw std::invalid_argument("grid box is degenerate");
        }
    }
    if (budget < 0) throw std::invalid_argument("budget must be nonnegative");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

std::vector<Vector> grid_starts(const GridSpec& spec, const Problem& problem) {
    spec.validate(problem.n);
    const Vector lo = spec.lo.size() ? spec.lo : problem.lo;
    const Vector hi = spec.hi.size() ? spec.hi : problem.hi;
    const int n = problem.n;
    std::vector<Vector> out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Vector x(n);
        for (int i = 0; i < n; ++i) {
            const int c = spec.counts[static_cast<std::size_t>(i)];
            x(i) = lo(i) + (hi(i) - lo(i)) * idx[static_cast<std::size_t>(i)] / (c - 1);
        }
        out.push_back(x);
        int d = n - 1;
        while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == spec.counts[static_cast<std::size_t>(d)]) {
            idx[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return out;
}

bool TrialRecord::operator==(const TrialRecord& o) const {
    return problem == o.problem && start == o.start && solver == o.solver && success == o.success &&
           same_double(metric, o.metric) && reason == o.reason && same_double(grad_norm, o.grad_norm) &&
           seed == o.seed;
}

TrialRecord make_record(const std::string& problem, const Vector& start, const std::string& solver,
                        const RunResult& run, double epsilon, Metric metric, std::uint64_t seed) {
    TrialRecord r;
    r.problem = problem;
    r.start = start;
    r.solver = solver;
    r.grad_norm = run.grad_norm_final;
    r.seed = seed;
    r.success = run.status == RunStatus::converged && run.grad_norm_final <= epsilon;
    if (r.success) {
        switch (metric) {
            case Metric::iterations: r.metric = run.counts.iterations; break;
            case Metric::f_evals: r.metric = run.counts.f_evals; break;
            case Metric::seconds: r.metric = run.seconds; break;
        }
    } else {
        r.metric = kInf;
        r.reason = run.status == RunStatus::converged ? "max_iter" : reason_tag(run.status);
    }
    return r;
}

std::vector<TrialRecord> run_trials(const std::vector<Trial>& trials, const std::vector<SolverSpec>& solvers,
                                    double epsilon, Metric metric, int threads, std::vector<RunResult>* runs) {
    const std::size_t total = trials.size() * solvers.size();
    std::vector<TrialRecord> out(total);
    std::vector<RunResult> results(runs ? total : 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < total; i = next++) {
            const Trial& t = trials[i / solvers.size()];
            const SolverSpec& s = solvers[i % solvers.size()];
            RunResult rr;
            bool threw = false;
            try {
                rr = s.run(*t.problem, t.start);
            } catch (const std::exception& e) {
                rr.status = RunStatus::subsolver_error;
                rr.grad_norm_final = kInf;
                rr.message = e.what();
                threw = true;
            }
            out[i] = make_record(t.problem->name, t.start, s.id, rr, epsilon, metric, t.seed);
            if (threw) {
                out[i].reason = "error";
            }
            if (runs) {
                results[i] = std::move(rr);
            }
        }
    };
    int nthreads = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nthreads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nthreads), std::max<std::size_t>(total, 1)));
    std::vector<std::thread> pool;
    for (int i = 1; i < nthreads; ++i) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread& th : pool) {
        th.join();
    }
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return record_less(out[a], out[b]); });
    std::vector<TrialRecord> sorted;
    sorted.reserve(total);
    std::vector<RunResult> sorted_runs;
    for (std::size_t i : order) {
        sorted.push_back(std::move(out[i]));
        if (runs) sorted_runs.push_back(std::move(results[i]));
    }
    if (runs) {
        *runs = std::move(sorted_runs);
    }
    return sorted;
}

std::vector<TrialRecord> run_grid(const GridSpec& spec, const Problem& problem,
                                  const std::vector<SolverSpec>& solvers, Metric metric, int threads) {
    std::vector<Trial> trials;
    for (const Vector& x : grid_starts(spec, problem)) {
        trials.push_back({&problem, x, spec.seed});
    }
    return run_trials(trials, solvers, spec.epsilon, metric, threads);
}

std::vector<ProfileCurve> performance_profile(const std::vector<TrialRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("performance_profile: no records");
    }
    std::set<std::string> solver_set;
    using Key = std::pair<std::string, std::vector<double>>;
    std::map<Key, std::map<std::string, double>> table;
    for (const TrialRecord& r : records) {
        solver_set.insert(r.solver);
        Key key{r.problem, std::vector<double>(r.start.data(), r.start.data() + r.start.size())};
        const double t = r.success ? std::max(r.metric, 1.0) : kInf;
        auto& cell = table[key];
        const auto it = cell.find(r.solver);
        cell[r.solver] = it == cell.end() ? t : std::min(it->second, t);
    }
    std::vector<ProfileCurve> curves;
    for (const std::string& s : solver_set) {
        curves.push_back({s, {}, {}, {}});
    }
    std::set<double> taus{1.0};
    for (const auto& [key, cell] : table) {
        double best = kInf;
        for (const auto& [s, t] : cell) best = std::min(best, t);
        for (ProfileCurve& c : curves) {
            const auto it = cell.find(c.solver);
            const double t = it == cell.end() ? kInf : it->second;
            const double r = std::isfinite(t) ? t / best : kInf;
            c.ratios.push_back(r);
            if (std::isfinite(r)) taus.insert(r);
        }
    }
    const double np = static_cast<double>(table.size());
    for (ProfileCurve& c : curves) {
        std::sort(c.ratios.begin(), c.ratios.end());
        c.tau.assign(taus.begin(), taus.end());
        for (double tau : c.tau) {
            const auto cnt = std::upper_bound(c.ratios.begin(), c.ratios.end(), tau) - c.ratios.begin();
            c.rho.push_back(static_cast<double>(cnt) / np);
        }
    }
    return curves;
}

double profile_value(const ProfileCurve& curve, double tau) {
    if (curve.ratios.empty()) return 0.0;
    const auto end = std::lower_bound(curve.ratios.begin(), curve.ratios.end(), kInf);
    const auto cnt = std::upper_bound(curve.ratios.begin(), end, tau) - curve.ratios.begin();
    return static_cast<double>(cnt) / static_cast<double>(curve.ratios.size());
}

std::vector<Vector> stress_starts(int n, int n_perturbed) {
    std::vector<Vector> out{Vector::Constant(n, -1.0)};
    for (int s = 1; s <= n_perturbed; ++s) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(s));
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        Vector x = Vector::Constant(n, -1.0);
        for (int i = 0; i < n; ++i) {
            x(i) += u(rng);
        }
        out.push_back(x);
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<StressRow> stress_protocol(int n, const std::vector<SolverSpec>& solvers, int n_perturbed,
                                       double epsilon, int threads, std::vector<TrialRecord>* records) {
    const Problem problem = rosenbrock(n);
    const std::vector<Vector> starts = stress_starts(n, n_perturbed);
    std::vector<Trial> trials;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        trials.push_back({&problem, starts[i], static_cast<std::uint64_t>(i)});
    }
    std::vector<RunResult> runs;
    std::vector<TrialRecord> recs = run_trials(trials, solvers, epsilon, Metric::iterations, threads, &runs);
    std::vector<StressRow> rows;
    for (const SolverSpec& s : solvers) {
        StressRow row;
        row.solver = s.id;
        row.n = n;
        std::vector<double> its, fes, secs;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (recs[i].solver != s.id) continue;
            ++row.trials;
            if (recs[i].success) {
                ++row.successes;
                its.push_back(runs[i].counts.iterations);
                fes.push_back(runs[i].counts.f_evals);
                secs.push_back(runs[i].seconds);
            }
        }
        row.success_rate = row.trials ? static_cast<double>(row.successes) / row.trials : 0.0;
        row.median_iterations = median(its);
        row.median_f_evals = median(fes);
        row.median_seconds = median(secs);
        rows.push_back(row);
    }
    if (records) {
        *records = std::move(recs);
    }
    return rows;
}

std::string records_to_csv(const std::vector<TrialRecord>& records) {
    Eigen::Index dim = 0;
    for (const TrialRecord& r : records) dim = std::max(dim, r.start.size());
    std::ostringstream os;
    os << "problem";
    for (Eigen::Index i = 0; i < dim; ++i) os << ",start_x" << i;
    os << ",solver,success,metric,reason,grad_norm,seed\n";
    for (const TrialRecord& r : records) {
        os << r.problem;
        for (Eigen::Index i = 0; i < dim; ++i) {
            os << ',';
            if (i < r.start.size()) os << fmt(r.start(i));
        }
        os << ',' << r.solver << ',' << (r.success ? 1 : 0) << ',' << fmt(r.metric) << ',' << r.reason << ','
           << fmt(r.grad_norm) << ',' << r.seed << '\n';
    }
    return os.str();
}

std::vector<TrialRecord> parse_records_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        throw std::runtime_error("records csv: missing header");
    }
    const std::vector<std::string> header = split(line, ',');
    if (header.size() < 7 || header.front() != "problem") {
        throw std::runtime_error("records csv: bad header");
    }
    const std::size_t dim = header.size() - 7;
    for (std::size_t i = 0; i < dim; ++i) {
        if (header[1 + i] != "start_x" + std::to_string(i)) {
            throw std::runtime_error("records csv: bad header column " + header[1 + i]);
        }
    }
    std::vector<TrialRecord> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != header.size()) {
            throw std::runtime_error("records csv: wrong field count on line " + std::to_string(lineno));
        }
        try {
            TrialRecord r;
            r.problem = f[0];
            std::vector<double> xs;
            for (std::size_t i = 0; i < dim; ++i) {
                if (!f[1 + i].empty()) xs.push_back(parse_double(f[1 + i]));
            }
            r.start = Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
            r.solver = f[1 + dim];
            if (f[2 + dim] != "0" && f[2 + dim] != "1") throw std::runtime_error("bad success flag");
            r.success = f[2 + dim] == "1";
            r.metric = parse_double(f[3 + dim]);
            r.reason = f[4 + dim];
            r.grad_norm = parse_double(f[5 + dim]);
            r.seed = std::stoull(f[6 + dim]);
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::runtime_error("records csv line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string profile_to_csv(const std::vector<ProfileCurve>& curves) {
    std::ostringstream os;
    os << "solver,tau,rho\n";
    for (const ProfileCurve& c : curves) {
        for (std::size_t i = 0; i < c.tau.size(); ++i) {
            os << c.solver << ',' << fmt(c.tau[i]) << ',' << fmt(c.rho[i]) << '\n';
        }
    }
    return os.str();
}

std::string stress_to_csv(const std::vector<StressRow>& rows) {
    std::ostringstream os;
    os << "solver,n,trials,successes,success_rate,median_iterations,median_f_evals,median_seconds\n";
    for (const StressRow& r : rows) {
        os << r.solver << ',' << r.n << ',' << r.trials << ',' << r.successes << ',' << fmt(r.success_rate) << ','
           << fmt(r.median_iterations) << ',' << fmt(r.median_f_evals) << ',' << fmt(r.median_seconds) << '\n';
    }
    return os.str();
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

}  // namespace

std::string profile_to_svg(const std::vector<ProfileCurve>& curves, const std::string& title) {
    const double W = 640, H = 400, ml = 60, mr = 160, mt = 40, mb = 50;
    const double pw = W - ml - mr, ph = H - mt - mb;
    double tau_max = 1.0;
    for (const ProfileCurve& c : curves) {
        for (double t : c.tau) tau_max = std::max(tau_max, t);
    }
    const double lmax = std::max(std::log10(tau_max) * 1.05, 1e-3);
    auto px = [&](double tau) { return ml + pw * std::log10(tau) / lmax; };
    auto py = [&](double rho) { return mt + ph * (1.0 - rho); };
    const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream os;
    char buf[256];
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", W, H);
    os << buf;
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">", ml);
    os << buf << xml_escape(title) << "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", ml, mt, pw,
                  ph);
    os << buf;
    for (int d = 0; d <= static_cast<int>(std::floor(lmax)); ++d) {
        const double x = px(std::pow(10.0, d));
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#ccc\"/>\n"
                      "<text x=\"%.2f\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"middle\">1e%d</text>\n",
                      x, mt, x, mt + ph, x, mt + ph + 16, d);
        os << buf;
    }
    for (int i = 0; i <= 4; ++i) {
        const double y = py(i / 4.0);
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%g\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">%.2f</text>\n",
                      ml - 6, y + 4, i / 4.0);
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\">tau (log scale)</text>\n",
                  ml + pw / 2, H - 12);
    os << buf;
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const ProfileCurve& c = curves[k];
        const char* color = palette[k % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        double prev = 0.0;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(1.0), py(0.0));
        os << buf;
        for (std::size_t i = 0; i < c.tau.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f %.2f,%.2f ", px(c.tau[i]), py(prev), px(c.tau[i]), py(c.rho[i]));
            os << buf;
            prev = c.rho[i];
        }
        std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(std::pow(10.0, lmax)), py(prev));
        os << buf << "\"/>\n";
        const double ly = mt + 16.0 * static_cast<double>(k) + 8.0;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>\n"
                      "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"11\">",
                      ml + pw + 10, ly, ml + pw + 30, ly, color, ml + pw + 36, ly + 4);
        os << buf << xml_escape(c.solver) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace almton
