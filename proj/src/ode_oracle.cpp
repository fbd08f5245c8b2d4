#include "qcurv/ode_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 7>;  // u, u', w, w', V0, Vp, Lambda

struct Overflow {
    double r;
};

constexpr double exp_guard = 700.0;

}  // namespace

const char* to_string(TerminalClass c) {
    switch (c) {
        case TerminalClass::normal_decay: return "normal_decay";
        case TerminalClass::quadratic_collapse: return "quadratic_collapse";
        case TerminalClass::blow_up: return "blow_up";
        case TerminalClass::inconclusive: return "inconclusive";
    }
    return "?";
}

const ShootSample* ShootState::find(double r) const {
    for (const auto& s : trajectory)
        if (s.r == r) return &s;
    return nullptr;
}

ShootState shoot(double a, double b, const CurvatureProfile& K, double r_end, const ShootOptions& opt) {
    if (!(r_end > 0.0)) throw domain_error("shoot needs r_end > 0");
    ShootState st;
    st.a = a;
    st.b = b;
    double p = K.p;
    double k0 = K(0.0) * std::exp(4.0 * a);
    double L = 1.0;
    if (std::abs(b) > 1.0) L = std::min(L, 1.0 / std::sqrt(std::abs(b)));
    if (std::abs(k0) > 1.0) L = std::min(L, std::pow(std::abs(k0), -0.25));
    double r1 = std::min(1e-4 * L, 0.5 * r_end);
    st.r_start = r1;

    auto series = [&](double r) {
        double r2 = r * r;
        ShootSample s{};
        s.r = r;
        s.u = a + b * r2 / 8.0 + k0 * r2 * r2 / 192.0;
        s.du = b * r / 4.0 + k0 * r2 * r / 48.0;
        s.w = b + k0 * r2 / 8.0;
        s.dw = k0 * r / 4.0;
        double e = std::exp(4.0 * a) * r2 * r2 / 4.0;
        s.V0 = omega3 * e;
        s.Vp = omega3 * std::exp(4.0 * a) * std::pow(r, p + 4.0) / (p + 4.0);
        s.Lambda = omega3 * K(0.0) * e;
        return s;
    };

    std::vector<double> times;
    double lo = std::log10(r1), hi = std::log10(r_end);
    int n = std::max(2, static_cast<int>(std::ceil((hi - lo) * opt.samples_per_decade)));
    for (int i = 0; i <= n; ++i) times.push_back(std::pow(10.0, lo + (hi - lo) * i / n));
    times.front() = r1;
    times.back() = r_end;
    for (double r : opt.extra_radii) {
        // dense output is not valid before the first step; the series covers a hair past r1
        if (r < r1 * (1.0 + 1e-9))
            st.trajectory.push_back(series(r));
        else if (r <= r_end)
            times.push_back(r);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    auto rhs = [&](const State& x, State& dx, double r) {
        if (4.0 * x[0] > exp_guard || !std::isfinite(x[0])) throw Overflow{r};
        double e = std::exp(4.0 * x[0]);
        double r3 = r * r * r;
        dx[0] = x[1];
        dx[1] = x[2] - 3.0 * x[1] / r;
        dx[2] = x[3];
        dx[3] = K(r) * e - 3.0 * x[3] / r;
        dx[4] = omega3 * e * r3;
        dx[5] = omega3 * std::pow(r, p) * e * r3;
        dx[6] = omega3 * K(r) * e * r3;
    };

    ShootSample s0 = series(r1);
    State x{s0.u, s0.du, s0.w, s0.dw, s0.V0, s0.Vp, s0.Lambda};
    auto obs = [&](const State& y, double r) {
        st.trajectory.push_back({r, y[0], y[1], y[2], y[3], y[4], y[5], y[6]});
    };
    auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
    bool blew = false;
    try {
        odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3 * r1, obs,
                                odeint::max_step_checker(100000));
        st.r_exit = r_end;
    } catch (const Overflow& o) {
        blew = true;
        st.r_exit = o.r;
        st.diagnostics = fmt::format("u exceeded the exponent guard near r = {:.6g}", o.r);
    } catch (const odeint::no_progress_error& ex) {
        st.r_exit = st.trajectory.empty() ? r1 : st.trajectory.back().r;
        st.diagnostics = fmt::format("integrator stalled: {}", ex.what());
    } catch (const odeint::step_adjustment_error& ex) {
        st.r_exit = st.trajectory.empty() ? r1 : st.trajectory.back().r;
        st.diagnostics = fmt::format("step size underflow: {}", ex.what());
    }
    std::sort(st.trajectory.begin(), st.trajectory.end(), [](auto& l, auto& r) { return l.r < r.r; });

    if (blew) {
        st.terminal = TerminalClass::blow_up;
        return st;
    }
    if (st.r_exit < r_end) {
        st.terminal = TerminalClass::inconclusive;
        return st;
    }
    // last decade
    std::vector<const ShootSample*> tail;
    for (const auto& s : st.trajectory)
        if (s.r >= r_end / 10.0) tail.push_back(&s);
    bool collapse = !tail.empty();
    for (auto* s : tail) collapse = collapse && s->w < -opt.collapse_level;
    const auto& last = *tail.back();
    bool rising = true;
    for (std::size_t i = 1; i < tail.size(); ++i) rising = rising && tail[i]->w >= tail[i - 1]->w;
    bool normal = last.w < 0.0 && rising && last.r * last.r * std::abs(last.w) < opt.normal_bound;
    if (collapse && !normal)
        st.terminal = TerminalClass::quadratic_collapse;
    else if (normal)
        st.terminal = TerminalClass::normal_decay;
    else
        st.terminal = TerminalClass::inconclusive;
    st.diagnostics = fmt::format("w(r_end) = {:.6g}, r^2|w| = {:.6g}", last.w, last.r * last.r * std::abs(last.w));
    return st;
}

ProbeResult finite_total_curvature_probe(double a, double b, const CurvatureProfile& K, double r_end, double tol,
                                         const ShootOptions& opt) {
    if (K.kind != ProfileKind::one_minus_rp) throw domain_error("probe expects a 1 - r^p profile");
    ShootState st = shoot(a, b, K, r_end, opt);
    ProbeResult pr;
    pr.terminal = st.terminal;
    for (const auto& s : st.trajectory) pr.partial.emplace_back(s.r, s.V0 + s.Vp);
    pr.last_increment = 0.0;
    pr.settled = false;
    pr.settle_radius = r_end;
    if (pr.partial.size() < 2) return pr;
    double r_last = pr.partial.back().first;
    double m_last = pr.partial.back().second;
    for (const auto& [r, m] : pr.partial)
        if (r >= r_last / 10.0) {
            pr.last_increment = std::abs(m_last - m);
            break;
        }
    // smallest radius beyond which every further increment is below tol
    for (std::size_t i = pr.partial.size(); i-- > 0;) {
        if (std::abs(m_last - pr.partial[i].second) >= tol) break;
        pr.settle_radius = pr.partial[i].first;
    }
    pr.settled = pr.last_increment < tol && st.terminal != TerminalClass::blow_up;
    return pr;
}

}  // namespace qcurv
