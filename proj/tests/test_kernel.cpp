#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "qcurv/curvature.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/kernel.hpp"

using namespace qcurv;

namespace {

// (2/pi) int_0^pi sin^2 t log(1/|r e1 - s w(t)|) dt, independent of the library oracle
double angular_average(double r, double s) {
    static boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [=](double t) {
        if (t <= 0.0 || t >= pi) return 0.0;
        double st = std::sin(0.5 * t);
        double d2 = (r - s) * (r - s) + 4.0 * r * s * st * st;
        if (d2 <= 0.0) return 0.0;
        return (2.0 / pi) * std::sin(t) * std::sin(t) * (-0.5 * std::log(d2));
    };
    return ts.integrate(f, 0.0, pi);
}

}  // namespace

TEST_CASE("closed form examples") {
    CHECK(kernel_closed_form(0.0, std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(kernel_closed_form(0.0, 3.7, Gauge::origin) == 0.0);
    CHECK(kernel_closed_form(1.0, 1.0) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(kernel_closed_form(2.0, 1.0) == doctest::Approx(-std::log(2.0) - 1.0 / 16.0).epsilon(1e-15));
    CHECK(kernel_closed_form(1.0, 2.0) == kernel_closed_form(2.0, 1.0));
    CHECK(kernel_closed_form(0.0, 1.0) == 0.0);
    CHECK_THROWS_AS(kernel_closed_form(1.0, 0.0), domain_error);
    CHECK_THROWS_AS(kernel_closed_form(1.0, -1.0), domain_error);
}

TEST_CASE("independent angular quadrature") {
    CHECK(angular_average(0.0, std::exp(1.0)) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(angular_average(1.0, 1.0) + 0.25) < 1e-10);
    CHECK(std::abs(angular_average(2.0, 1.0) - (-std::log(2.0) - 1.0 / 16.0)) < 1e-10);
}

TEST_CASE("closed form against the independent oracle on a log grid") {
    const int n = 50;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double r = 1e-3 * std::pow(1e6, i / double(n - 1));
            double s = 1e-3 * std::pow(1e6, j / double(n - 1));
            worst = std::max(worst, std::abs(kernel_closed_form(r, s) - angular_average(r, s)));
        }
    CHECK(worst <= 1e-8);
}

TEST_CASE("library oracle") {
    for (auto [r, s] : {std::pair{0.3, 0.3}, std::pair{2.0, 1.0}, std::pair{1e-3, 1e3}, std::pair{5.0, 5.0 + 1e-9}}) {
        auto o = kernel_oracle(r, s);
        CHECK(std::abs(o.value - angular_average(r, s)) < 1e-10);
        CHECK(o.error <= 1e-10);
    }
    CHECK(kernel_oracle(0.0, 1.0).value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(kernel_oracle(1.0, 0.0), domain_error);
}

TEST_CASE("symmetry, gauge relation and diagonal regularity") {
    for (double r : {1e-2, 0.5, 1.0, 7.0, 300.0})
        for (double s : {1e-2, 0.5, 1.0, 7.0, 300.0}) {
            CHECK(kernel_closed_form(r, s) == kernel_closed_form(s, r));
            CHECK(kernel_closed_form(r, s, Gauge::origin) - kernel_closed_form(r, s) ==
                  doctest::Approx(std::log(s)).epsilon(1e-14));
        }
    double s = 2.0, prev_jump = 1.0;
    for (double e : {1e-2, 1e-3, 1e-4, 1e-5}) {
        double jump = std::abs(kernel_closed_form(s * (1 + e), s) - kernel_closed_form(s * (1 - e), s));
        CHECK(jump < prev_jump);
        // C^1: the difference quotient stays bounded
        CHECK(jump / (2 * e * s) < 1.0);
        prev_jump = jump;
    }
}

TEST_CASE("operator assembly") {
    GridParams gp;
    gp.nodes = 400;
    auto g = RadialGrid::make(gp);
    auto A = assemble_operator(*g, Gauge::absolute);
    CHECK(A.rows() == static_cast<Eigen::Index>(g->size()));
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(A.cols());
    CHECK((A * zero).norm() == 0.0);

    auto A0 = assemble_operator(*g, Gauge::origin);
    CHECK(A0.row(0).cwiseAbs().maxCoeff() == 0.0);
    // the two gauges differ by the origin row
    CHECK(((A0.row(5) - A.row(5)) - (-A.row(0))).cwiseAbs().maxCoeff() < 1e-12);

    auto A2 = assemble_operator(*g, Gauge::absolute, 3);
    CHECK((A - A2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spherical solution through the operator") {
    auto g = RadialGrid::make(GridParams{});
    auto A = assemble_operator(*g, Gauge::absolute);
    std::size_t n = g->size();
    double R = g->r_max();
    Eigen::VectorXd u(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r = (*g)[i];
        u(i) = std::log(2.0 / (1.0 + r * r));
        f(i) = 6.0 * std::exp(4.0 * u(i));
    }
    // exterior contribution of 6 e^{4u} = 96 s^-8 beyond R, by hand:
    // T1 = int 96 s^-5 log s ds, T2 = int 96 s^-7 ds
    double T1 = 96.0 * std::pow(R, -4) * (4.0 * std::log(R) + 1.0) / 16.0;
    double T2 = 16.0 * std::pow(R, -6);
    Eigen::VectorXd Au = A * f;
    double c = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < n && (*g)[i] <= 10.0; ++i) {
        double r = (*g)[i];
        double v = u(i) - Au(i) - 0.25 * (-T1 - 0.25 * r * r * T2);
        if (i == 0) c = v;
        worst = std::max(worst, std::abs(v - c));
    }
    CHECK(c == doctest::Approx(std::log(2.0)).epsilon(1e-5));
    CHECK(worst <= 1e-4);
}

TEST_CASE("operator dump round trip") {
    GridParams gp;
    gp.nodes = 40;
    auto g = RadialGrid::make(gp);
    auto A = assemble_operator(*g, Gauge::origin);
    std::string path = "kernel_dump_test.bin";
    dump_operator(A, Gauge::origin, path);
    Gauge gg = Gauge::absolute;
    auto B = load_operator(path, &gg);
    CHECK(gg == Gauge::origin);
    CHECK((A - B).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("gauge names") {
    CHECK(gauge_from_string(to_string(Gauge::absolute)) == Gauge::absolute);
    CHECK(gauge_from_string(to_string(Gauge::origin)) == Gauge::origin);
    CHECK_THROWS(gauge_from_string("nope"));
}
