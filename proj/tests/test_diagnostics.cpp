#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qcurv/diagnostics.hpp"
#include "qcurv/errors.hpp"

using namespace qcurv;

namespace {

GridPtr grid(double r_max = 1e3, int nodes = 1200) {
    GridParams gp;
    gp.r_max = r_max;
    gp.nodes = nodes;
    return RadialGrid::make(gp);
}

RadialField spherical(GridPtr g, double l = 1.0) {
    auto u = spherical_field(g, l, 0.0);
    return RadialField(g, u.values(), Tail::power(-2.0, std::log(2.0 / l)));
}

RadialField sample(GridPtr g, double (*f)(double), std::optional<Tail> t = std::nullopt) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*g)[i]);
    return RadialField(g, v, t);
}

const SolutionRecord& rec140() {
    static SolutionRecord r = [] {
        GridParams gp;
        gp.nodes = 800;
        static auto D = Discretization::build(gp);
        SolveSpec s;
        s.profile = CurvatureProfile::one_minus(2.0);
        s.target = 140.0;
        return solve(s, *D);
    }();
    return r;
}

}  // namespace

TEST_CASE("pohozaev identity on the sphere") {
    auto u = spherical(grid());
    auto K = CurvatureProfile::constant(6.0);
    auto ph = pohozaev_check(u, K, lambda_sph);
    CHECK(ph.lhs == 0.0);
    CHECK(ph.residual <= 1e-12);
    ph = pohozaev_check(u, K, total_curvature(u, K));
    CHECK(ph.residual <= 1e-3);
}

TEST_CASE("negative case record") {
    const auto& r = rec140();
    REQUIRE(r.converged);
    auto d = diagnose(r, true, false);
    CHECK(d.pohozaev.applicable);
    CHECK(d.pohozaev.residual <= 0.01);
    CHECK(d.pohozaev.lhs < 0.0);
    CHECK(d.slope.target == doctest::Approx(-140.0 / (8 * pi * pi)).epsilon(1e-14));
    CHECK(std::abs(d.slope.sigma / d.slope.target - 1.0) <= 0.02);
    CHECK(d.decay.decreasing);
    REQUIRE(d.blowup);
    CHECK(d.blowup->r_k == doctest::Approx(12.0 * std::exp(-r.u[0])));
}

TEST_CASE("positive case sign") {
    GridParams gp;
    gp.nodes = 1000;
    gp.r_max = 1e5;
    auto D = Discretization::build(gp);
    SolveSpec s;
    s.profile = CurvatureProfile::one_plus(2.0);
    s.mode = SolveMode::prescribed_origin;
    s.target = 0.0;
    auto r = solve(s, *D);
    REQUIRE(r.converged);
    auto ph = pohozaev_check(r);
    CHECK(ph.lhs > 0.0);
    CHECK(r.Lambda > lambda_sph);
    CHECK(ph.residual <= 0.01);
}

TEST_CASE("kelvin transform") {
    auto g = grid();
    RadialField c(g, std::vector<double>(g->size(), 0.7), Tail::power(0.0, 0.7));
    auto kc = kelvin_transform(c, 0.0);
    for (double v : kc.field.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

    // the spherical metric is inversion invariant for alpha = 2
    auto u = spherical(g);
    auto ku = kelvin_transform(u, lambda_sph / (8 * pi * pi));
    CHECK(ku.alpha == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ku.curvature_exponent == doctest::Approx(0.0).epsilon(1e-14));
    const auto& kg = ku.field.grid();
    for (std::size_t i = 0; i < kg.size(); ++i) {
        double r = kg[i];
        CHECK(ku.field[i] == doctest::Approx(std::log(2.0 / (1.0 + r * r))).epsilon(1e-12));
    }

    // involution
    auto back = kelvin_transform(ku.field, 2.0);
    for (std::size_t i = 1; i + 1 < g->size(); ++i) CHECK(std::abs(back.field[i] - u[i]) <= 1e-8);
    CHECK_THROWS_AS(kelvin_transform(RadialField(g, u.values()), 2.0), domain_error);
}

TEST_CASE("kelvin image of a negative case solution solves the transformed equation") {
    const auto& r = rec140();
    REQUIRE(r.converged);
    double alpha = r.Lambda / (8 * pi * pi);
    auto k = kelvin_transform(r.u, alpha);
    auto w = radial_laplacian(radial_laplacian(k.field));
    const auto& g = k.field.grid();
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double x = g[i];
        if (x < 0.5 || x > 2.0) continue;
        double f = r.spec.profile(1.0 / x) * std::exp(4.0 * k.field[i]) * std::pow(x, -k.curvature_exponent);
        scale = std::max(scale, std::abs(f));
        worst = std::max(worst, std::abs(w[i] - f));
    }
    CHECK(worst / scale <= 1e-2);
}

TEST_CASE("asymptotic slope") {
    auto g = grid();
    auto u = sample(g, [](double r) { return r > 0 ? -1.3 * std::log(r) + 0.4 : 0.0; });
    auto f = asymptotic_slope(u);
    CHECK(std::abs(f.sigma + 1.3) <= 1e-10);
    CHECK(std::abs(f.offset - 0.4) <= 1e-9);
    CHECK(f.rms <= 1e-10);
}

TEST_CASE("blow-up rescaling of the sphere") {
    auto g = grid();
    auto u = spherical(g, 50.0);
    auto br = blowup_rescale(u);
    CHECK(br.u0 == doctest::Approx(std::log(100.0)));
    CHECK(br.r_k == doctest::Approx(0.12));
    // with r_k = 12 e^{-u(0)} the unit profile sits at scale 6
    CHECK(br.deviation > 0.1);
    CHECK(br.fit_scale == doctest::Approx(6.0).epsilon(1e-4));
    CHECK(br.fit_deviation <= 1e-4);
    CHECK(br.eta_values.front() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log log coefficient on synthetic fields") {
    auto g = grid(1e6);
    auto with = sample(g, [](double r) { return r > 3 ? -1.5 * std::log(r) - 0.5 * std::log(std::log(r)) : 0.0; });
    auto f = loglog_coefficient(with, 2.0);
    CHECK(std::abs(f.coefficient + 0.5) <= 1e-6);
    CHECK(std::abs(f.drift) <= 1e-6);
    auto without = sample(g, [](double r) { return r > 3 ? -1.5 * std::log(r) + 0.2 : 0.0; });
    CHECK(std::abs(loglog_coefficient(without, 2.0).coefficient) <= 1e-6);
    CHECK_THROWS_AS(loglog_coefficient(with, 2.0, 100.0, 2.0), domain_error);
}

TEST_CASE("decay check") {
    auto g = grid();
    auto fast = sample(g, [](double r) { return -2.0 * std::log1p(r); }, Tail::power(-2.0, 0.0));
    CHECK(decay_check(fast, 2.0).decreasing);
    auto slow = sample(g, [](double r) { return -1.0 * std::log1p(r); }, Tail::power(-1.0, 0.0));
    CHECK_FALSE(decay_check(slow, 2.0).decreasing);
}
