// qcurv: radial normal solutions of the Q-curvature equation in R^4.
//
//   qcurv solve        --p 2 --Lambda 140 --out rec.json
//   qcurv solve        --profile one_plus --rho 0 --out rec.json
//   qcurv sweep        --kind negative_window_sweep --out sweep.jsonl
//   qcurv verify       rec.json
//   qcurv oracle       --a 0.69314718 --b -8 --profile constant --K0 6
//   qcurv kernel-check
//
// Exit codes: 0 success, 2 assertion failure, 3 non-convergence.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qcurv/errors.hpp"
#include "qcurv/experiments.hpp"

using namespace qcurv;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_assert = 2;
constexpr int exit_nonconv = 3;

struct Overrides {
    std::string config;
    std::optional<double> p, Lambda, rho, rmax;
    std::optional<int> nodes;
    std::string out;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "JSON configuration file");
    app->add_option("--p", o.p, "power p of the curvature profile");
    app->add_option("--Lambda", o.Lambda, "prescribed total curvature");
    app->add_option("--rho", o.rho, "prescribed u(0)");
    app->add_option("--rmax", o.rmax, "truncation radius");
    app->add_option("--nodes", o.nodes, "grid intervals");
    app->add_option("--out", o.out, "output path");
}

void emit(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json_file(j, path);
    }
}

void apply_grid(GridParams& g, const Overrides& o) {
    if (o.rmax) g.r_max = *o.rmax;
    if (o.nodes) g.nodes = *o.nodes;
}

int cmd_solve(const Overrides& o, const std::string& profile, double K0, double mu, double eps, double lambda,
              const std::vector<double>& schedule, bool expect_failure, bool csv) {
    json cfg = o.config.empty() ? json::object() : read_json_file(o.config);
    SolveSpec spec = cfg.contains("spec") ? solve_spec_from_json(cfg.at("spec")) : SolveSpec{};
    GridParams gp = cfg.contains("grid") ? grid_params_from_json(cfg.at("grid")) : GridParams{};
    apply_grid(gp, o);

    if (!profile.empty()) {
        double p = o.p.value_or(spec.profile.p);
        switch (profile_kind_from_string(profile)) {
            case ProfileKind::one_minus_rp: spec.profile = CurvatureProfile::one_minus(p, mu); break;
            case ProfileKind::one_plus_rp: spec.profile = CurvatureProfile::one_plus(p, eps); break;
            case ProfileKind::constant: spec.profile = CurvatureProfile::constant(K0); break;
            case ProfileKind::regularized_lambda: spec.profile = CurvatureProfile::regularized(lambda, p, eps); break;
        }
    } else if (o.p) {
        spec.profile.p = *o.p;
    }
    if (o.Lambda && o.rho) throw domain_error("--Lambda and --rho are exclusive");
    if (o.Lambda) {
        spec.mode = SolveMode::prescribed_lambda;
        spec.target = *o.Lambda;
    }
    if (o.rho) {
        spec.mode = SolveMode::prescribed_origin;
        spec.target = *o.rho;
    }
    if (!schedule.empty()) spec.schedule = schedule;
    if (expect_failure) spec.expect_failure = true;
    spec.profile.validate();

    auto D = Discretization::build(gp, thread_count());
    auto rec = solve(spec, *D);
    json j = to_json(rec, true);
    j["grid"] = to_json(gp);
    if (rec.converged) j["diagnostics"] = to_json(diagnose(rec, true, false));
    emit(j, o.out);
    if (csv && !o.out.empty() && o.out != "-") write_csv(rec.u, o.out + ".csv");

    fmt::print(stderr, "converged={} Lambda={:.10g} u0={:.10g} iterations={} window={}{}\n", rec.converged, rec.Lambda,
               rec.u[0], rec.iterations, rec.window_check, rec.message.empty() ? "" : " (" + rec.message + ")");
    if (rec.converged) return exit_ok;
    return rec.expect_failure ? exit_ok : exit_nonconv;
}

int cmd_sweep(const Overrides& o, const std::string& kind) {
    json cfg = o.config.empty() ? json::object() : read_json_file(o.config);
    if (!kind.empty()) cfg["kind"] = kind;
    if (o.p) cfg["p"] = *o.p;
    ExperimentConfig c = experiment_config_from_json(cfg);
    apply_grid(c.grid, o);
    if (!o.out.empty()) c.out = o.out;
    auto res = run_experiment(c);
    if (!c.out.empty())
        write_jsonl(res, c, c.out);
    else
        std::cout << res.summary.dump(2) << '\n';
    fmt::print(stderr, "{}: {}\n", to_string(c.kind), res.passed ? "PASS" : "FAIL");
    return res.passed ? exit_ok : exit_assert;
}

int cmd_verify(const Overrides& o, const std::string& record, double tol) {
    std::string path = record.empty() ? o.config : record;
    if (path.empty()) throw io_error("verify needs a record path");
    json j = read_json_file(path);
    SolutionRecord rec = record_from_json(j);
    if (!rec.converged) {
        fmt::print(stderr, "record did not converge; nothing to verify\n");
        return exit_nonconv;
    }
    auto d = diagnose(rec, true, rec.spec.profile.kind == ProfileKind::one_minus_rp &&
                                     rec.spec.target == thresholds_for(rec.spec.profile.p).star);
    emit(to_json(d), o.out);
    bool ok = !d.pohozaev.applicable || d.pohozaev.residual <= tol;
    fmt::print(stderr, "pohozaev residual {:.3e} slope {:.6f} (target {:.6f}): {}\n", d.pohozaev.residual,
               d.slope.sigma, d.slope.target, ok ? "PASS" : "FAIL");
    return ok ? exit_ok : exit_assert;
}

int cmd_oracle(const Overrides& o, std::optional<double> a, std::optional<double> b, const std::string& record,
               const std::string& profile, double K0, double r_end, bool trajectory) {
    if (!record.empty()) {
        SolutionRecord rec = record_from_json(read_json_file(record));
        auto cc = oracle_crosscheck(rec, 5.0, r_end);
        json j = to_json(cc.shot, trajectory);
        j["max_diff"] = cc.max_diff;
        emit(j, o.out);
        bool ok = cc.max_diff <= Tolerances{}.oracle;
        fmt::print(stderr, "max |u_ode - u_int| on [0,5] = {:.3e}: {}\n", cc.max_diff, ok ? "PASS" : "FAIL");
        return ok ? exit_ok : exit_assert;
    }
    if (!a || !b) throw domain_error("oracle needs --a and --b, or --record");
    CurvatureProfile K = CurvatureProfile::one_minus(o.p.value_or(2.0));
    if (profile == "one_plus_rp") K = CurvatureProfile::one_plus(o.p.value_or(2.0));
    if (profile == "constant") K = CurvatureProfile::constant(K0);
    auto st = shoot(*a, *b, K, r_end);
    emit(to_json(st, trajectory), o.out.empty() ? "-" : o.out);
    if (!o.out.empty() && o.out != "-") write_trajectory_csv(st, o.out + ".csv");
    fmt::print(stderr, "terminal: {}\n", to_string(st.terminal));
    return exit_ok;
}

int cmd_kernel_check(const Overrides& o, int n) {
    GridParams gp;
    apply_grid(gp, o);
    auto kv = validate_kernel(n);
    auto bm = spherical_benchmark(gp);
    Tolerances t;
    double lam_err = std::abs(bm.Lambda / lambda_sph - 1.0);
    bool ok = kv.max_error <= t.kernel && bm.residual <= t.benchmark_residual && lam_err <= t.benchmark_lambda;
    json j = {{"kernel", {{"points", kv.points}, {"max_error", kv.max_error}, {"max_asymmetry", kv.max_asymmetry},
                          {"max_gauge_error", kv.max_gauge_error}, {"seconds", kv.seconds}}},
              {"benchmark", {{"residual", bm.residual}, {"c", bm.c}, {"Lambda", bm.Lambda}, {"lap0", bm.lap0},
                             {"seconds", bm.seconds}}}};
    emit(j, o.out);
    fmt::print(stderr, "kernel max error {:.2e}, benchmark residual {:.2e}, Lambda error {:.2e}: {}\n", kv.max_error,
               bm.residual, lam_err, ok ? "PASS" : "FAIL");
    return ok ? exit_ok : exit_assert;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial normal solutions of Delta^2 u = K e^{4u} in R^4"};
    app.require_subcommand(1);

    Overrides so, wo, vo, oo, ko;
    std::string profile, sweep_kind, record, orecord, oprofile = "one_minus_rp";
    double K0 = 6.0, mu = 1.0, eps = 0.0, lambda = 1.0, tol = Tolerances{}.pohozaev, r_end = 1e3, oK0 = 6.0;
    std::vector<double> schedule;
    bool expect_failure = false, csv = true, traj = false;
    std::optional<double> a, b;
    int kn = 50;

    auto* s = app.add_subcommand("solve", "solve one configuration");
    add_common(s, so);
    s->add_option("--profile", profile, "one_minus_rp | one_plus_rp | constant | regularized_lambda");
    s->add_option("--K0", K0, "constant curvature value");
    s->add_option("--mu", mu, "coefficient of r^p in 1 - mu r^p");
    s->add_option("--eps", eps, "Gaussian regularizer");
    s->add_option("--lambda", lambda, "scale of the regularized profile");
    s->add_option("--schedule", schedule, "intermediate targets")->delimiter(',');
    s->add_flag("--expect-failure", expect_failure, "run in expect-failure mode");
    s->add_flag("!--no-csv", csv, "skip the profile CSV");

    auto* w = app.add_subcommand("sweep", "run an experiment");
    add_common(w, wo);
    w->add_option("--kind", sweep_kind, "experiment kind");

    auto* v = app.add_subcommand("verify", "re-run diagnostics on a stored record");
    add_common(v, vo);
    v->add_option("record", record, "record JSON");
    v->add_option("--tol", tol, "Pohozaev residual tolerance");

    auto* o = app.add_subcommand("oracle", "integrate the radial ODE");
    add_common(o, oo);
    o->add_option("--a", a, "u(0)");
    o->add_option("--b", b, "Delta u(0)");
    o->add_option("--record", orecord, "cross-check a stored record");
    o->add_option("--profile", oprofile, "one_minus_rp | one_plus_rp | constant");
    o->add_option("--K0", oK0, "constant curvature value");
    o->add_option("--r-end", r_end, "integration end radius");
    o->add_flag("--trajectory", traj, "include the trajectory in the JSON output");

    auto* k = app.add_subcommand("kernel-check", "kernel oracle and spherical benchmark");
    add_common(k, ko);
    k->add_option("--n", kn, "points per axis");

    CLI11_PARSE(app, argc, argv);
    try {
        if (s->parsed()) return cmd_solve(so, profile, K0, mu, eps, lambda, schedule, expect_failure, csv);
        if (w->parsed()) return cmd_sweep(wo, sweep_kind);
        if (v->parsed()) return cmd_verify(vo, record, tol);
        if (o->parsed()) return cmd_oracle(oo, a, b, orecord, oprofile, oK0, r_end, traj);
        if (k->parsed()) return cmd_kernel_check(ko, kn);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}
