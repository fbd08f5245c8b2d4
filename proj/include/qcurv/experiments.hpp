#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcurv/io.hpp"

namespace qcurv {

enum class ExperimentKind {
    negative_window_sweep,
    positive_rho_sweep,
    blowup_ramp,
    threshold_compactness,
    kernel_validation,
    oracle_crosscheck,
    nonexistence_probe,
    finite_curvature_probe
};

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

// What each kind reproduces.
const char* reproduction_target(ExperimentKind k);

// Calibration constants; none of these come from the analysis, only from desk-scale runs.
struct Tolerances {
    double pohozaev = 0.01;          // |lhs - rhs| / Lsph
    double slope = 0.02;             // relative
    double violation_factor = 10.0;  // nonexistence: Pohozaev violation multiple
    double u0_band = 2.0;            // compactness spread / contrast rise
    double endpoint = 0.05;          // rho sweep endpoint relative distance
    double max_jump = 30.0;          // rho sweep adjacent |dLambda|
    double profile = 0.05;           // blow-up shape, absolute max norm on |x| <= 2
    double mass_fraction = 0.9;      // mass in B_0.1 / Lsph
    double oracle = 1e-3;            // max |u_ode - u_int| on [0, 5]
    double kernel = 1e-8;
    double benchmark_residual = 1e-4;
    double benchmark_lambda = 0.002;
    double cauchy = 1e-6;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::negative_window_sweep;
    double p = 2.0;
    std::vector<double> values;     // Lambda, rho, ... depending on kind
    std::vector<double> contrast;   // ascending control schedule (compactness)
    std::vector<double> rho;        // positive-case origin values (oracle cross-check)
    std::vector<std::pair<double, double>> cases;  // (p, Lambda) pairs for the nonexistence probe
    bool include_threshold = true;  // append Lambda_{*,p} exactly (compactness)
    GridParams grid;
    SolveSpec solver;               // tolerances and iteration limits; profile/target ignored
    Tolerances tol;
    int samples = 20;               // random probes, kernel grid size, ...
    unsigned long long seed = 12345;
    double r_end = 1e3;
    std::string out;
    int threads = 0;                // 0: QCURV_THREADS or 1
};

ExperimentConfig experiment_config_from_json(const json& j);
json to_json(const ExperimentConfig& c);

// FNV-1a of the canonical JSON dump.
std::string config_hash(const json& j);

// Defaults per kind (values, grid) reproducing the standard runs.
ExperimentConfig default_experiment(ExperimentKind k, double p = 2.0);

struct ExperimentResult {
    bool passed = false;
    json summary;
    std::vector<json> rows;
    std::vector<SolutionRecord> records;  // window and rho sweeps; not serialized
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes rows then the summary as JSON lines; every line carries the config hash.
void write_jsonl(const ExperimentResult& res, const ExperimentConfig& cfg, const std::string& path);

int thread_count(int requested = 0);

// Runs f(i) for i in [0, n) on a pool of `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

// Spherical benchmark: K = 6, lambda = 1.
struct BenchmarkResult {
    double residual = 0.0;  // max |u_sph - A f - tail - c| on [0, 10]
    double c = 0.0;
    double Lambda = 0.0;
    double lap0 = 0.0;
    double seconds = 0.0;
};
BenchmarkResult spherical_benchmark(const GridParams& gp);

struct CrossCheck {
    double max_diff = 0.0;  // on grid nodes in [0, r_cmp]
    ShootState shot;
};
CrossCheck oracle_crosscheck(const SolutionRecord& rec, double r_cmp = 5.0, double r_end = 1e3);

struct ProbeEvidence {
    double p = 0.0, Lambda = 0.0;
    std::string tail_model;
    std::vector<std::string> outcomes;  // per initial guess
    bool evidence = false;              // every guess failed or violated the identity
    bool contradiction = false;         // a converged, Pohozaev-consistent solution
};
ProbeEvidence nonexistence_evidence(double p, double Lambda, const Discretization& D, const SolveSpec& base,
                                    const Tolerances& tol, std::vector<json>* rows = nullptr);

struct KernelValidation {
    double max_error = 0.0;
    double max_asymmetry = 0.0;
    double max_gauge_error = 0.0;
    double seconds = 0.0;
    int points = 0;
};
KernelValidation validate_kernel(int n = 50, double lo = 1e-3, double hi = 1e3);

}  // namespace qcurv
