// One line per acceptance criterion; exit status 1 if any fails.
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <random>

#include "qcurv/diagnostics.hpp"
#include "qcurv/experiments.hpp"

using namespace qcurv;

namespace {

int failures = 0;

void report(int n, const char* what, bool ok, const std::string& detail) {
    fmt::print("criterion {} {}: {}  {}\n", n, what, ok ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
    if (!ok) ++failures;
}

double secs(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double get(const json& j, const char* k) { return j.at(k).is_null() ? NAN : j.at(k).get<double>(); }

double jacobian_error(const SolutionRecord& rec, const SolveSpec& s, const Discretization& D) {
    auto ns = newton_system(rec.u, rec.c, s, D, rec.Lambda);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd v(ns.x.size());
        for (auto& x : v) x = nd(rng);
        double h = 1e-6;
        Eigen::VectorXd xp = ns.x + h * v, xm = ns.x - h * v;
        Eigen::VectorXd fd =
            (newton_system(rec.u, rec.c, s, D, rec.Lambda, &xp).F - newton_system(rec.u, rec.c, s, D, rec.Lambda, &xm).F) /
            (2 * h);
        Eigen::VectorXd an = ns.J * v;
        worst = std::max(worst, (fd - an).lpNorm<Eigen::Infinity>() / an.lpNorm<Eigen::Infinity>());
    }
    return worst;
}

double quadrature_error(const RadialGrid& g) {
    auto q = make_quadrature(g);
    double R = g.r_max(), worst = 0.0;
    for (int k = 0; k <= 2; ++k) {
        double s[4] = {0, 0, 0, 0};
        for (std::size_t i = 0; i < g.size(); ++i) {
            double f = std::pow(g[i], k);
            s[0] += q.w0[i] * f;
            s[1] += q.w1[i] * f;
            s[2] += q.w3[i] * f;
            s[3] += q.w5[i] * f;
        }
        int shift[4] = {1, 2, 4, 6};
        for (int m = 0; m < 4; ++m) {
            double exact = std::pow(R, k + shift[m]) / (k + shift[m]);
            worst = std::max(worst, std::abs(s[m] / exact - 1.0));
        }
    }
    return worst;
}

}  // namespace

int main() {
    Tolerances tol;

    {
        auto kv = validate_kernel(50);
        report(1, "kernel vs angular quadrature", kv.max_error <= tol.kernel && kv.seconds < 10.0,
               fmt::format("max_error={:.2e} points={} seconds={:.2f}", kv.max_error, kv.points, kv.seconds));
    }

    {
        GridParams gp;
        auto bm = spherical_benchmark(gp);
        double lam = std::abs(bm.Lambda / lambda_sph - 1.0);
        report(2, "spherical benchmark",
               bm.residual <= tol.benchmark_residual && lam <= tol.benchmark_lambda && bm.seconds < 30.0,
               fmt::format("N={} residual={:.2e} Lambda_rel={:.2e} seconds={:.1f}", gp.nodes, bm.residual, lam,
                           bm.seconds));
    }

    auto t0 = std::chrono::steady_clock::now();
    auto window = run_experiment(default_experiment(ExperimentKind::negative_window_sweep));
    {
        std::string d;
        for (const auto& r : window.rows)
            d += fmt::format("[L={} conv={} poho={:.1e} slope={:.1e}] ", r.at("target").get<double>(),
                             r.at("converged").get<bool>(),
                             r.contains("diagnostics") ? get(r.at("diagnostics").at("pohozaev"), "residual") : NAN,
                             r.contains("slope_rel_error") ? get(r, "slope_rel_error") : NAN);
        report(3, "negative window p=2", window.passed, d + fmt::format("seconds={:.0f}", secs(t0)));
    }

    t0 = std::chrono::steady_clock::now();
    {
        auto c = default_experiment(ExperimentKind::nonexistence_probe);
        c.cases = {{2.0, 100.0}, {2.0, 160.0}, {5.0, 150.0}};
        auto r = run_experiment(c);
        std::string d;
        for (const auto& e : r.summary.at("cases"))
            d += fmt::format("[p={} L={} evidence={} contradiction={}] ", e.at("p").get<double>(),
                             e.at("Lambda").get<double>(), e.at("evidence").get<bool>(),
                             e.at("contradiction").get<bool>());
        report(4, "nonexistence evidence", r.passed, d + fmt::format("seconds={:.0f}", secs(t0)));
    }

    t0 = std::chrono::steady_clock::now();
    {
        auto r = run_experiment(default_experiment(ExperimentKind::threshold_compactness));
        const auto& s = r.summary;
        report(5, "compactness at the threshold", r.passed,
               fmt::format("spread={:.3f} terminal={} rise={:.2f} seconds={:.0f}", get(s, "u0_spread_descending"),
                           s.at("terminal_converged").get<bool>(), get(s, "u0_rise_contrast"), secs(t0)));
    }

    t0 = std::chrono::steady_clock::now();
    {
        auto r = run_experiment(default_experiment(ExperimentKind::blowup_ramp));
        const auto& s = r.summary;
        report(6, "blow-up shape at 156.5", r.passed,
               fmt::format("fit_deviation={:.2e} shape_ok={} mass_B0.1={:.3f} mass_ok={} seconds={:.0f}",
                           get(s, "final_fit_deviation"), s.at("shape_ok").get<bool>(),
                           get(s, "final_mass_fraction_B01"), s.at("mass_ok").get<bool>(), secs(t0)));
    }

    t0 = std::chrono::steady_clock::now();
    auto rho = run_experiment(default_experiment(ExperimentKind::positive_rho_sweep));
    {
        const auto& s = rho.summary;
        report(7, "positive case rho sweep", rho.passed,
               fmt::format("inside={} max_jump={:.2f} L(-8)={:.3f} rel={:.3f} L(6)={:.3f} rel={:.4f} seconds={:.0f}",
                           s.at("inside_window").get<bool>(), get(s, "max_adjacent_jump"),
                           get(s, "Lambda_at_rho_min"), get(s, "rel_error_rho_min"), get(s, "Lambda_at_rho_max"),
                           get(s, "rel_error_rho_max"), secs(t0)));
    }

    t0 = std::chrono::steady_clock::now();
    {
        bool ok = true;
        double worst = 0.0;
        int n = 0;
        std::vector<const SolutionRecord*> recs;
        for (const auto& r : window.records) recs.push_back(&r);
        for (const auto& r : rho.records) recs.push_back(&r);
        std::vector<double> diff(recs.size(), 0.0);
        parallel_for(recs.size(), thread_count(), [&](std::size_t i) {
            if (recs[i]->converged) diff[i] = oracle_crosscheck(*recs[i]).max_diff;
        });
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (!recs[i]->converged) continue;
            ++n;
            worst = std::max(worst, diff[i]);
            ok = ok && diff[i] <= tol.oracle;
        }
        report(8, "ODE oracle agreement", ok && n > 0,
               fmt::format("records={} max_diff={:.2e} seconds={:.0f}", n, worst, secs(t0)));
    }

    {
        GridParams gp;
        auto D = Discretization::build(gp);
        const auto& g = D->grid;

        // Kelvin involution on the sphere, away from the reflected grid ends
        auto u = spherical_field(g, 1.0, 0.0);
        RadialField ut(g, u.values(), Tail::power(-2.0, std::log(2.0)));
        auto once = kelvin_transform(ut, 2.0);
        auto twice = kelvin_transform(once.field, 2.0);
        double kel = 0.0;
        for (std::size_t i = 1; i + 1 < g->size(); ++i) kel = std::max(kel, std::abs(twice.field[i] - ut[i]));

        // group law with factors on the geometric lattice
        int ng = gp.nodes - gp.patch;
        double q = std::pow(gp.r_max / gp.r_min, 1.0 / ng);
        auto a = scale_field(scale_field(ut, std::pow(q, 3)), std::pow(q, -7));
        auto b = scale_field(ut, std::pow(q, -4));
        double grp = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i)
            if ((*g)[i] >= gp.r_min * q * q * q && (*g)[i] <= gp.r_max / (q * q * q))
                grp = std::max(grp, std::abs(a[i] - b[i]));

        double jac = 0.0;
        for (const auto& rec : window.records) {
            if (!rec.converged) continue;
            SolveSpec s = rec.spec;
            jac = std::max(jac, jacobian_error(rec, s, *D));
        }

        double quad = quadrature_error(*g);
        bool ok = kel <= 1e-8 && grp <= 1e-12 && jac <= 1e-6 && quad <= 1e-10;
        report(9, "property suites", ok,
               fmt::format("kelvin={:.1e} group={:.1e} jacobian={:.1e} quadrature={:.1e}", kel, grp, jac, quad));
    }

    return failures == 0 ? 0 : 1;
}
