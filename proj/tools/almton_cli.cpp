#include "almton/bench.hpp"
#include "almton/config.hpp"
#include "almton/diagnostics.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

using namespace almton;

namespace {

// Keys shared by the config file and the command line. Flags win over the file.
const std::vector<std::string> kCommonKeys{"problem", "solvers", "eps",   "budget", "seed", "out",
                                           "threads", "metric",  "grid",  "lo",     "hi",   "n",
                                           "perturbed", "start", "in",    "svg",    "points"};

struct Invocation {
    std::string config_path;
    std::map<std::string, std::string> flags;
};

void add_flag(CLI::App* app, Invocation& inv, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        "--" + key, [&inv, key](const std::string& v) { inv.flags[key] = v; }, help);
}

KeyValueConfig resolve(const Invocation& inv) {
    KeyValueConfig cfg = inv.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(inv.config_path);
    for (const auto& [k, v] : inv.flags) {
        cfg.set(k, v);
    }
    std::vector<std::string> known = kCommonKeys;
    for (const std::string& k : solver_setting_keys()) known.push_back(k);
    const auto unknown = cfg.unknown_keys(known);
    if (!unknown.empty()) {
        std::string msg = "unknown config key(s):";
        for (const std::string& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    return cfg;
}

Vector parse_vector(const std::string& key, const std::string& s) {
    const auto items = split_list(s);
    Vector v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        KeyValueConfig one;
        one.set(key, items[i]);
        v(static_cast<Eigen::Index>(i)) = one.number(key, 0.0);
    }
    return v;
}

std::vector<int> parse_counts(const std::string& s) {
    std::vector<int> out;
    std::string cur;
    for (char ch : s + "x") {
        if (ch == 'x' || ch == 'X' || ch == ',') {
            KeyValueConfig one;
            one.set("grid", cur);
            out.push_back(static_cast<int>(one.integer("grid", 0)));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

struct Common {
    std::vector<Problem> problems;
    std::vector<SolverSpec> solvers;
    SolverOptions options;
    std::string out;
    int threads = 0;
    std::uint64_t seed = 0;
    Metric metric = Metric::iterations;
};

Common common(const KeyValueConfig& cfg, const std::string& default_problem,
              const std::vector<std::string>& default_solvers, double default_eps, int default_budget) {
    Common c;
    try {
        c.problems = problems_by_name(cfg.text("problem", default_problem));
        c.options.epsilon = cfg.number("eps", default_eps);
        c.options.budget = static_cast<int>(cfg.integer("budget", default_budget));
        if (!(c.options.epsilon > 0.0)) throw ConfigError("eps must be positive");
        if (c.options.budget < 0) throw ConfigError("budget must be nonnegative");
        apply_solver_settings(cfg, c.options);
        for (const std::string& id : cfg.list("solvers", default_solvers)) {
            c.solvers.push_back(make_solver(id, c.options));
        }
        c.metric = parse_metric(cfg.text("metric", "iterations"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.solvers.empty()) throw ConfigError("no solvers given");
    c.out = cfg.text("out", "");
    c.threads = static_cast<int>(cfg.integer("threads", 0));
    const long long seed = cfg.integer("seed", 0);
    if (seed < 0) throw ConfigError("seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(seed);
    return c;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        write_file(path, content);
        std::cerr << "wrote " << path << "\n";
    }
}

GridSpec grid_spec(const KeyValueConfig& cfg, const Problem& p, const Common& c) {
    GridSpec spec;
    spec.problem = p.name;
    spec.counts = parse_counts(cfg.text("grid", "30x30"));
    if (spec.counts.size() == 1) spec.counts.assign(static_cast<std::size_t>(p.n), spec.counts[0]);
    if (cfg.has("lo")) spec.lo = parse_vector("lo", *cfg.get("lo"));
    if (cfg.has("hi")) spec.hi = parse_vector("hi", *cfg.get("hi"));
    spec.budget = c.options.budget;
    spec.epsilon = c.options.epsilon;
    spec.seed = c.seed;
    try {
        spec.validate(p.n);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(p.name + ": " + e.what());
    }
    return spec;
}

int cmd_grid(const KeyValueConfig& cfg) {
    const Common c = common(cfg, "classic", {"almton-simple", "almton-heuristic", "newton"}, 1e-8, 100);
    std::vector<Trial> trials;
    for (const Problem& p : c.problems) {
        for (const Vector& x : grid_starts(grid_spec(cfg, p, c), p)) {
            trials.push_back({&p, x, c.seed});
        }
    }
    const auto records = run_trials(trials, c.solvers, c.options.epsilon, c.metric, c.threads);
    emit(c.out, records_to_csv(records));
    std::map<std::string, int> wins;
    for (const TrialRecord& r : records) wins[r.solver] += r.success ? 1 : 0;
    for (const SolverSpec& s : c.solvers) {
        std::fprintf(stderr, "%-18s %d / %zu successful\n", s.id.c_str(), wins[s.id], trials.size());
    }
    return 0;
}

int cmd_stress(const KeyValueConfig& cfg) {
    const Common c = common(cfg, "rosenbrock", {"almton-simple", "almton-heuristic", "newton-cg", "lbfgs"}, 1e-6,
                            1000);
    const int perturbed = static_cast<int>(cfg.integer("perturbed", 10));
    if (perturbed < 0) throw ConfigError("perturbed must be nonnegative");
    std::vector<StressRow> rows;
    for (const std::string& ns : cfg.list("n", {"5", "20"})) {
        KeyValueConfig one;
        one.set("n", ns);
        const int n = static_cast<int>(one.integer("n", 0));
        if (n < 2) throw ConfigError("n must be at least 2");
        const auto part = stress_protocol(n, c.solvers, perturbed, c.options.epsilon, c.threads);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    emit(c.out, stress_to_csv(rows));
    for (const StressRow& r : rows) {
        std::fprintf(stderr, "n=%-3d %-18s success %2d/%-2d (%5.1f%%)  median iters %g  f-evals %g  time %.3gs\n", r.n,
                     r.solver.c_str(), r.successes, r.trials, 100.0 * r.success_rate, r.median_iterations,
                     r.median_f_evals, r.median_seconds);
    }
    return 0;
}

int cmd_profile(const KeyValueConfig& cfg) {
    const std::string in = cfg.text("in", "");
    if (in.empty()) throw ConfigError("profile needs --in <records.csv>");
    const auto records = parse_records_csv(read_file(in));
    if (records.empty()) throw ConfigError(in + ": no records");
    const auto curves = performance_profile(records);
    emit(cfg.text("out", ""), profile_to_csv(curves));
    if (cfg.has("svg")) {
        write_file(*cfg.get("svg"), profile_to_svg(curves, "Performance profile"));
        std::cerr << "wrote " << *cfg.get("svg") << "\n";
    }
    return 0;
}

int cmd_audit(const KeyValueConfig& cfg) {
    const Common c = common(cfg, "classic", {"almton-simple", "almton-heuristic"}, 1e-8, 100);
    std::ostringstream csv;
    csv << "kind,run,check,k,value,bound\n";
    int total = 0;
    int dirty = 0;
    for (const Problem& p : c.problems) {
        std::vector<Vector> starts;
        if (cfg.has("start")) {
            starts.push_back(parse_vector("start", *cfg.get("start")));
            if (starts.back().size() != p.n) throw ConfigError("start has the wrong dimension for " + p.name);
        } else if (cfg.has("grid")) {
            starts = grid_starts(grid_spec(cfg, p, c), p);
        } else {
            starts.push_back(p.standard_start);
        }
        for (const SolverSpec& s : c.solvers) {
            if (s.id.rfind("almton-", 0) != 0) throw ConfigError("audit only applies to almton-* solvers");
            AlmtonConfig ac = c.options.almton;
            ac.epsilon = c.options.epsilon;
            ac.max_iter = c.options.budget;
            ac.strategy = parse_strategy(s.id.substr(7));
            for (std::size_t i = 0; i < starts.size(); ++i) {
                const RunResult r = run(p, starts[i], ac);
                const AuditReport rep = audit_run(r, estimate_bounds(r, p, ac), ac);
                const std::string id = p.name + "/" + s.id + "/" + std::to_string(i);
                ++total;
                dirty += rep.clean() ? 0 : 1;
                if (starts.size() == 1) {
                    std::cerr << id << " status " << to_string(r.status) << " grad " << r.grad_norm_final << "\n"
                              << rep.text();
                }
                csv << rep.csv_rows(id);
            }
        }
    }
    emit(c.out, csv.str());
    std::fprintf(stderr, "audited %d runs, %d with violations\n", total, dirty);
    return 0;
}

int cmd_check_derivs(const KeyValueConfig& cfg) {
    const std::string which = cfg.text("problem", "all");
    std::vector<Problem> problems;
    if (which == "all") {
        for (const std::string& name : problem_names()) {
            if (name != "classic" && name.find(':') == std::string::npos) problems.push_back(make_problem(name));
        }
    } else {
        try {
            problems = problems_by_name(which);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    const int points = static_cast<int>(cfg.integer("points", 20));
    const long long seed = cfg.integer("seed", 0);
    if (points < 1 || seed < 0) throw ConfigError("points must be positive and seed nonnegative");
    std::ostringstream os;
    os << "problem,point,grad_err,hess_err,tensor_err,pass\n";
    int failures = 0;
    for (const Problem& p : problems) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        double worst[3] = {0.0, 0.0, 0.0};
        bool ok = true;
        for (int k = 0; k < points; ++k) {
            Vector x(p.n);
            for (int i = 0; i < p.n; ++i) {
                std::uniform_real_distribution<double> u(p.lo(i), p.hi(i));
                x(i) = u(rng);
            }
            const FdReport rep = fd_check(p.bundle(x), [&p](const Vector& y) { return p.bundle(y); });
            const bool pass = rep.gradient <= 1e-6 && rep.hessian <= 1e-5 && rep.tensor <= 1e-4;
            ok = ok && pass;
            worst[0] = std::max(worst[0], rep.gradient);
            worst[1] = std::max(worst[1], rep.hessian);
            worst[2] = std::max(worst[2], rep.tensor);
            char buf[256];
            std::snprintf(buf, sizeof buf, "%s,%d,%.3e,%.3e,%.3e,%d\n", p.name.c_str(), k, rep.gradient, rep.hessian,
                          rep.tensor, pass ? 1 : 0);
            os << buf;
        }
        failures += ok ? 0 : 1;
        std::fprintf(stderr, "%-20s %s  worst grad %.2e  hess %.2e  tensor %.2e%s\n", p.name.c_str(),
                     ok ? "ok  " : "FAIL", worst[0], worst[1], worst[2], p.approximate ? "  (approximate)" : "");
    }
    emit(cfg.text("out", ""), os.str());
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ALMTON benchmark harness"};
    app.require_subcommand(1);
    Invocation inv;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const KeyValueConfig&);
    };
    const Sub subs[] = {
        {"grid", "basin-of-attraction grid over one problem or the classic suite", cmd_grid},
        {"stress", "Rosenbrock stress protocol (standard start plus perturbed starts)", cmd_stress},
        {"profile", "performance profile from a records CSV", cmd_profile},
        {"audit", "run ALMTON and audit the complexity bounds", cmd_audit},
        {"check-derivs", "finite-difference check of analytic derivatives", cmd_check_derivs},
    };
    int (*chosen)(const KeyValueConfig&) = nullptr;
    for (const Sub& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", inv.config_path, "key=value config file");
        add_flag(sc, inv, "problem", "problem name (rosenbrock[:N], himmelblau, camel3, ..., classic)");
        add_flag(sc, inv, "solvers", "comma-separated solver ids");
        add_flag(sc, inv, "eps", "gradient-norm tolerance");
        add_flag(sc, inv, "budget", "iteration budget per run");
        add_flag(sc, inv, "seed", "seed recorded in output / used for sampling");
        add_flag(sc, inv, "out", "output path (default stdout)");
        add_flag(sc, inv, "threads", "worker threads (0: all cores)");
        add_flag(sc, inv, "metric", "iterations, f_evals or seconds");
        add_flag(sc, inv, "grid", "points per axis, e.g. 30x30");
        add_flag(sc, inv, "lo", "grid box lower corner, comma-separated");
        add_flag(sc, inv, "hi", "grid box upper corner, comma-separated");
        add_flag(sc, inv, "n", "stress dimensions, comma-separated");
        add_flag(sc, inv, "perturbed", "perturbed starts per dimension");
        add_flag(sc, inv, "start", "single start point for audit");
        add_flag(sc, inv, "in", "input records CSV");
        add_flag(sc, inv, "svg", "SVG output path for the profile");
        add_flag(sc, inv, "points", "sample points for check-derivs");
        const auto fn = s.fn;
        sc->callback([&chosen, fn] { chosen = fn; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return chosen(resolve(inv));
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
