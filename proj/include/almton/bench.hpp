#pragma once

#include "almton/almton.hpp"
#include "almton/baselines.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace almton {

using SolverFn = std::function<RunResult(const Problem&, const Vector&)>;

struct SolverSpec {
    std::string id;
    SolverFn run;
};

/// Shared settings from which solvers are instantiated. epsilon and budget
/// override the corresponding fields of both configs.
struct SolverOptions {
    double epsilon = 1e-8;
    int budget = 100;
    AlmtonConfig almton;
    BaselineConfig baseline;
};

/// Known ids: almton-simple, almton-heuristic, gd, newton, newton-cg,
/// third-order, cubic-reg, lbfgs. Throws std::invalid_argument otherwise.
SolverSpec make_solver(const std::string& id, const SolverOptions& opts);
std::vector<std::string> solver_ids();

enum class Metric { iterations, f_evals, seconds };
std::string to_string(Metric m);
Metric parse_metric(const std::string& name);

struct GridSpec {
    std::string problem;
    std::vector<int> counts{30, 30};  // points per axis
    Vector lo;                        // empty: the problem's domain
    Vector hi;
    int budget = 100;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;           // recorded only; grid starts are deterministic

    /// Throws std::invalid_argument for counts < 2 or a degenerate box.
    void validate(int n) const;
};

/// Evenly spaced starts including both box ends, first axis varying slowest.
std::vector<Vector> grid_starts(const GridSpec& spec, const Problem& problem);

struct TrialRecord {
    std::string problem;
    Vector start;
    std::string solver;
    bool success = false;
    double metric = 0.0;  // +inf on failure
    std::string reason;   // empty on success
    double grad_norm = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const TrialRecord& o) const;
};

TrialRecord make_record(const std::string& problem, const Vector& start, const std::string& solver,
                        const RunResult& run, double epsilon, Metric metric, std::uint64_t seed);

struct Trial {
    const Problem* problem = nullptr;
    Vector start;
    std::uint64_t seed = 0;
};

/// Runs every (trial, solver) pair on a pool of `threads` workers (0: hardware
/// concurrency). Output is sorted by problem, start, solver. A solver that
/// throws yields a failed record with reason "error".
std::vector<TrialRecord> run_trials(const std::vector<Trial>& trials, const std::vector<SolverSpec>& solvers,
                                    double epsilon, Metric metric, int threads = 0,
                                    std::vector<RunResult>* runs = nullptr);

/// One record per (start, solver) over the grid of `spec`.
std::vector<TrialRecord> run_grid(const GridSpec& spec, const Problem& problem,
                                  const std::vector<SolverSpec>& solvers, Metric metric = Metric::iterations,
                                  int threads = 0);

struct ProfileCurve {
    std::string solver;
    std::vector<double> ratios;  // r_{p,s} over all instances, sorted, inf for failures
    std::vector<double> tau;
    std::vector<double> rho;
};

/// Instances are (problem, start) pairs. r = t / min over solvers of t, inf
/// when the solver failed; instances where every solver failed stay in the
/// denominator. Metrics of zero are raised to one before forming ratios. The
/// tau grid is every distinct finite ratio (and 1). Throws on empty input.
std::vector<ProfileCurve> performance_profile(const std::vector<TrialRecord>& records);

/// rho_s(tau) for an arbitrary tau. Failures never count, even at tau = inf.
double profile_value(const ProfileCurve& curve, double tau);

struct StressRow {
    std::string solver;
    int n = 0;
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    double median_iterations = kNaN;  // medians over successful runs
    double median_f_evals = kNaN;
    double median_seconds = kNaN;
};

/// Standard start (-1, ..., -1), then the standard start plus U[-0.5, 0.5]^n
/// noise from std::mt19937_64 seeded with 1..n_perturbed.
std::vector<Vector> stress_starts(int n, int n_perturbed);

/// Rosenbrock stress test: every solver from every stress start.
std::vector<StressRow> stress_protocol(int n, const std::vector<SolverSpec>& solvers, int n_perturbed = 10,
                                       double epsilon = 1e-6, int threads = 0,
                                       std::vector<TrialRecord>* records = nullptr);

double median(std::vector<double> v);

std::string records_to_csv(const std::vector<TrialRecord>& records);
/// Throws std::runtime_error on malformed input.
std::vector<TrialRecord> parse_records_csv(const std::string& text);
std::string profile_to_csv(const std::vector<ProfileCurve>& curves);
std::string stress_to_csv(const std::vector<StressRow>& rows);
/// Step plot of rho_s(tau) with a log-scale tau axis.
std::string profile_to_svg(const std::vector<ProfileCurve>& curves, const std::string& title);

/// Throws std::runtime_error mentioning the path on failure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace almton
