#include "qcurv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

constexpr double exp_guard = 700.0;

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct System {
    const Discretization& D;
    const SolveSpec& S;
    Gauge gauge;
    TailModel tmodel;
    double lam_tail;

    std::size_t n() const { return D.size(); }
    bool lambda_mode() const { return S.mode == SolveMode::prescribed_lambda; }

    std::size_t nx() const {
        if (gauge == Gauge::absolute) return n() + 1;
        return lambda_mode() ? n() : n() - 1;
    }

    Eigen::VectorXd pack(const Eigen::VectorXd& u, double c) const {
        Eigen::VectorXd x(nx());
        if (gauge == Gauge::absolute) {
            x.head(n()) = u;
            x(n()) = c;
        } else if (lambda_mode()) {
            x = u;
        } else {
            x = u.tail(n() - 1);
        }
        return x;
    }

    void unpack(const Eigen::VectorXd& x, Eigen::VectorXd& u, double& c) const {
        u.resize(n());
        if (gauge == Gauge::absolute) {
            u = x.head(n());
            c = x(n());
        } else if (lambda_mode()) {
            u = x;
            c = u(0);
        } else {
            u(0) = S.target;
            u.tail(n() - 1) = x;
            c = S.target;
        }
    }

    struct Eval {
        Eigen::VectorXd f;    // K e^{4u}
        Eigen::VectorXd Af;
        Eigen::VectorXd full; // u - A f - tail - c on all nodes
        TailMoments tm;
        Eigen::VectorXd res;  // packed equations
        double G = 0.0;       // Lambda(u) - target
        double Lambda = 0.0;
    };

    TailMoments moments(double uN) const {
        if (tmodel == TailModel::none) return {};
        Tail t = matched_tail(tmodel, S.profile, lam_tail, D.grid->r_max(), uN);
        return tail_moments(t, S.profile, D.grid->r_max(), gauge == Gauge::absolute);
    }

    Eval eval(const Eigen::VectorXd& u, double c) const {
        if (!u.allFinite()) throw blow_up("non-finite iterate");
        if (4.0 * u.maxCoeff() > exp_guard) throw blow_up(fmt::format("4u reached {:g}", 4.0 * u.maxCoeff()));
        Eval e;
        const auto& g = *D.grid;
        e.f.resize(n());
        for (std::size_t i = 0; i < n(); ++i) e.f(i) = S.profile(g[i]) * std::exp(4.0 * u(i));
        e.Af = D.A * e.f;
        e.tm = moments(u(n() - 1));
        e.full.resize(n());
        if (gauge == Gauge::absolute) {
            e.full = u - e.Af - 0.25 * (-e.tm.T1 * Eigen::VectorXd::Ones(n()) - 0.25 * e.tm.T2 * D.r2);
            e.full.array() -= c;
        } else {
            e.full = u - e.Af + 0.0625 * e.tm.T2 * D.r2;
            e.full.array() -= u(0) - e.Af(0);
        }
        e.Lambda = omega3 * (D.w3.dot(e.f) + e.tm.T0);
        e.G = e.Lambda - S.target;
        e.res.resize(nx());
        if (gauge == Gauge::absolute) {
            e.res.head(n()) = e.full;
            e.res(n()) = e.G / lambda_sph;
        } else if (lambda_mode()) {
            e.res.head(n() - 1) = e.full.tail(n() - 1);
            e.res(n() - 1) = e.G / lambda_sph;
        } else {
            e.res = e.full.tail(n() - 1);
        }
        return e;
    }

    Eigen::MatrixXd jacobian(const Eval& e) const {
        std::size_t N = n() - 1;
        Eigen::VectorXd df = 4.0 * e.f;
        Eigen::MatrixXd M = -(D.A * df.asDiagonal());
        if (gauge == Gauge::origin) {
            Eigen::RowVectorXd r0 = M.row(0);
            M.rowwise() -= r0;
            M.col(0).array() -= 1.0;
        }
        M.diagonal().array() += 1.0;
        if (tmodel != TailModel::none) {
            if (gauge == Gauge::absolute)
                M.col(N) -= 0.25 * (-e.tm.dT1 * Eigen::VectorXd::Ones(n()) - 0.25 * e.tm.dT2 * D.r2);
            else
                M.col(N) += 0.0625 * e.tm.dT2 * D.r2;
        }
        Eigen::RowVectorXd grow = (omega3 / lambda_sph) * (D.w3.array() * df.array()).matrix().transpose();
        grow(N) += omega3 * e.tm.dT0 / lambda_sph;

        Eigen::MatrixXd J(nx(), nx());
        if (gauge == Gauge::absolute) {
            J.setZero();
            J.topLeftCorner(n(), n()) = M;
            J.col(n()).head(n()).setConstant(-1.0);
            J.row(n()).head(n()) = grow;
        } else if (lambda_mode()) {
            J.topRows(n() - 1) = M.bottomRows(n() - 1);
            J.row(n() - 1) = grow;
        } else {
            J = M.bottomRightCorner(n() - 1, n() - 1);
        }
        return J;
    }
};

Gauge pick_gauge(const SolveSpec& S, TailModel tm, double lam_tail) {
    if (S.mode == SolveMode::prescribed_origin) {
        if (S.gauge && *S.gauge != Gauge::origin) throw domain_error("prescribed origin value needs the origin gauge");
        return Gauge::origin;
    }
    if (S.gauge) return *S.gauge;
    // the log moment of a liouville tail degenerates near the lower threshold
    if (tm == TailModel::liouville && (lam_tail - thresholds_for(S.profile.p).star) / (2 * pi * pi) < 0.1)
        return Gauge::origin;
    return Gauge::absolute;
}

double initial_lambda_tail(const SolveSpec& S) {
    if (S.mode == SolveMode::prescribed_lambda) return S.target;
    if (S.lambda_hint) return *S.lambda_hint;
    if (S.profile.kind == ProfileKind::one_plus_rp) {
        auto th = thresholds_for(S.profile.p);
        return 0.5 * (std::max(th.sph, th.p_quarter_sph) + th.two_star);
    }
    return lambda_sph;
}

struct NewtonOutcome {
    Eigen::VectorXd u;
    double c = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    std::string message;
};

NewtonOutcome run_newton(const System& sys, Eigen::VectorXd u, double c, int outer, std::vector<IterationLog>& hist) {
    const auto& S = sys.S;
    NewtonOutcome out;
    Eigen::VectorXd x = sys.pack(u, c);
    System::Eval e;
    try {
        e = sys.eval(u, c);
    } catch (const error& ex) {
        out.message = ex.what();
        out.u = u;
        out.c = c;
        return out;
    }
    for (int it = 0; it <= S.max_iter; ++it) {
        double nrm = e.res.lpNorm<Eigen::Infinity>();
        out.residual = nrm;
        out.iterations = it;
        if (!std::isfinite(nrm)) {
            out.message = "non-finite residual";
            break;
        }
        if (nrm < S.newton_tol) {
            out.converged = true;
            break;
        }
        if (it == S.max_iter) {
            out.message = fmt::format("no convergence in {} iterations (residual {:.3e})", S.max_iter, nrm);
            break;
        }
        Eigen::VectorXd dx = Eigen::PartialPivLU<Eigen::MatrixXd>(sys.jacobian(e)).solve(-e.res);
        if (!dx.allFinite()) {
            out.message = "singular Jacobian";
            break;
        }
        double n0 = e.res.norm();
        double th = S.damping;
        bool accepted = false;
        for (;;) {
            Eigen::VectorXd xt = x + th * dx;
            Eigen::VectorXd ut;
            double ct;
            sys.unpack(xt, ut, ct);
            try {
                System::Eval et = sys.eval(ut, ct);
                if (et.res.norm() <= (1.0 - 1e-4 * th) * n0 || th <= S.theta_min) {
                    x = xt;
                    u = ut;
                    c = ct;
                    e = std::move(et);
                    accepted = true;
                }
            } catch (const blow_up&) {
            }
            if (accepted || th <= S.theta_min) break;
            th = std::max(0.5 * th, S.theta_min);
        }
        hist.push_back({outer, it, nrm, th, u(0)});
        if (!accepted) {
            out.message = "blow-up: exponent guard hit at the smallest step";
            break;
        }
    }
    sys.unpack(x, out.u, out.c);
    return out;
}

}  // namespace

std::shared_ptr<const Discretization> Discretization::build(const GridParams& gp, int threads) {
    auto d = std::make_shared<Discretization>();
    d->params = gp;
    d->grid = RadialGrid::make(gp);
    d->quad = make_quadrature(*d->grid);
    d->A = assemble_operator(*d->grid, Gauge::absolute, threads);
    std::size_t n = d->grid->size();
    d->r2.resize(n);
    for (std::size_t i = 0; i < n; ++i) d->r2(i) = (*d->grid)[i] * (*d->grid)[i];
    d->w1 = to_eigen(d->quad.w1);
    d->w3 = to_eigen(d->quad.w3);
    return d;
}

std::string window_check(const CurvatureProfile& K, SolveMode mode, double target) {
    if (mode == SolveMode::prescribed_origin)
        return K.kind == ProfileKind::one_plus_rp ? "inside" : "unknown";
    switch (K.kind) {
        case ProfileKind::one_minus_rp: {
            auto th = thresholds_for(K.p);
            if (K.p >= 4.0) return "outside";
            return (target >= th.star && target < th.sph) ? "inside" : "outside";
        }
        case ProfileKind::one_plus_rp: {
            auto th = thresholds_for(K.p);
            if (!(target > th.sph && target < th.two_star)) return "outside";
            return target > std::max(th.sph, th.p_quarter_sph) ? "inside" : "necessary_only";
        }
        case ProfileKind::constant:
            return std::abs(target - lambda_sph) <= 1e-9 * lambda_sph ? "inside" : "outside";
        case ProfileKind::regularized_lambda:
            return (target > 0.0 && target < lambda_sph) ? "inside" : "unknown";
    }
    return "unknown";
}

RadialField spherical_field(GridPtr grid, double l, double shift) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double r = (*grid)[i];
        v[i] = std::log(2.0 * l / (1.0 + l * l * r * r)) + shift;
    }
    return RadialField(grid, std::move(v));
}

RadialField default_guess(const SolveSpec& spec, const Discretization& D, double l_factor) {
    const auto& K = spec.profile;
    double K0 = K(0.0);
    double base = K0 > 0.0 ? 0.25 * std::log(6.0 / K0) : 0.25 * std::log(6.0);
    if (spec.mode == SolveMode::prescribed_origin) {
        // bubble core with the far-field slope of the tail seed
        double l = 0.5 * std::exp(spec.target - base) * l_factor;
        double half = initial_lambda_tail(spec) / (16.0 * pi * pi);
        std::vector<double> v(D.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double r = (*D.grid)[i];
            v[i] = std::log(2.0 * l) - half * std::log1p(l * l * r * r) + base;
        }
        return RadialField(D.grid, std::move(v));
    }
    double l = 1.0;
    if (K.kind == ProfileKind::one_minus_rp && K.p < 4.0 && spec.target < lambda_sph) {
        // Pohozaev balance against the p-moment of the bubble of scale 1/l
        double vp1 = 16.0 * pi * pi * boost::math::tgamma(0.5 * (K.p + 4.0)) * boost::math::tgamma(0.5 * (4.0 - K.p)) / 6.0;
        l = std::pow(6.0 * vp1 * K.mu / (lambda_sph - spec.target), 1.0 / K.p);
    }
    RadialField u = spherical_field(D.grid, l * l_factor, base);
    // shift so the grid curvature is within 20% of the target
    double lam = 0.0;
    for (std::size_t i = 0; i < D.size(); ++i) lam += D.w3(i) * K((*D.grid)[i]) * std::exp(4.0 * u[i]);
    lam *= omega3;
    if (lam > 0.0 && spec.target > 0.0 && std::abs(lam / spec.target - 1.0) > 0.2)
        u = shift_field(u, 0.25 * std::log(spec.target / lam));
    return u;
}

RadialField residual(const RadialField& u, double c, const SolveSpec& spec, const Discretization& D,
                     std::optional<double> lambda_tail) {
    double lt = lambda_tail.value_or(initial_lambda_tail(spec));
    TailModel tm = spec.tail == TailModel::none ? TailModel::none : resolve_tail_model(spec.tail, spec.profile, lt);
    System sys{D, spec, pick_gauge(spec, tm, lt), tm, lt};
    Eigen::VectorXd uv = to_eigen(u.values());
    if (sys.gauge == Gauge::origin) c = uv(0);
    return RadialField(D.grid, to_std(sys.eval(uv, c).full));
}

NewtonSystem newton_system(const RadialField& u, double c, const SolveSpec& spec, const Discretization& D,
                           double lambda_tail, const Eigen::VectorXd* x_override) {
    TailModel tm = spec.tail == TailModel::none ? TailModel::none
                                                : resolve_tail_model(spec.tail, spec.profile, lambda_tail);
    System sys{D, spec, pick_gauge(spec, tm, lambda_tail), tm, lambda_tail};
    Eigen::VectorXd uv = to_eigen(u.values());
    NewtonSystem ns;
    ns.x = x_override ? *x_override : sys.pack(uv, c);
    double cc;
    sys.unpack(ns.x, uv, cc);
    auto e = sys.eval(uv, cc);
    ns.F = e.res;
    ns.J = sys.jacobian(e);
    return ns;
}

namespace {

SolutionRecord solve_direct(const SolveSpec& spec_in, const Discretization& D, const std::optional<RadialField>& guess,
                            std::optional<double> c_guess) {
    spec_in.profile.validate();
    SolutionRecord rec;
    rec.spec = spec_in;
    SolveSpec& spec = rec.spec;
    rec.window_check = window_check(spec.profile, spec.mode, spec.target);
    rec.expect_failure = spec.expect_failure;
    if (rec.window_check == "outside" && !spec.expect_failure) {
        rec.expect_failure = spec.expect_failure = true;
        rec.message = "target outside the admissible window: expect-failure mode";
    }

    RadialField u0 = guess ? *guess : default_guess(spec, D);
    rec.branch = guess ? "warm-start" : "spherical-guess";
    if (u0.grid().size() != D.size()) throw invalid_grid("initial guess lives on a different grid");

    // intermediate targets first
    if (!spec.schedule.empty()) {
        SolveSpec step = spec;
        step.schedule.clear();
        std::optional<RadialField> g = u0;
        std::optional<double> cg = c_guess;
        for (double t : spec.schedule) {
            step.target = t;
            auto r = solve(step, D, g, cg);
            if (!r.converged) {
                rec.u = r.u;
                rec.converged = false;
                rec.message = fmt::format("schedule step {:g} failed: {}", t, r.message);
                return rec;
            }
            g = r.u;
            cg = r.c;
        }
        u0 = *g;
        c_guess = cg;
        rec.branch = "schedule";
    }

    Eigen::VectorXd u = to_eigen(u0.values());
    double c = c_guess.value_or(u(0));
    if (spec.mode == SolveMode::prescribed_origin) u(0) = spec.target;
    double lam_tail = initial_lambda_tail(spec);

    TailModel tm = TailModel::none;
    Gauge gauge = Gauge::absolute;
    NewtonOutcome out;
    int outer = 0;
    double lam_achieved = 0.0;
    TailMoments tmom;
    try {
        for (outer = 0; outer < std::max(1, spec.max_outer); ++outer) {
            tm = spec.tail == TailModel::none ? TailModel::none : resolve_tail_model(spec.tail, spec.profile, lam_tail);
            gauge = pick_gauge(spec, tm, lam_tail);
            System sys{D, spec, gauge, tm, lam_tail};
            if (gauge == Gauge::absolute && !c_guess && outer == 0) {
                // c consistent with the guess at the origin
                auto e = sys.eval(u, 0.0);
                c = e.full(0);
            }
            out = run_newton(sys, u, c, outer, rec.history);
            u = out.u;
            c = out.c;
            if (!out.converged) break;
            auto e = sys.eval(u, c);
            lam_achieved = e.Lambda;
            tmom = e.tm;
            if (spec.mode == SolveMode::prescribed_lambda) break;
            if (std::abs(lam_achieved - lam_tail) <= 1e-10 * lambda_sph) break;
            lam_tail = lam_achieved;
        }
    } catch (const error& ex) {
        out.converged = false;
        out.message = ex.what();
    }

    rec.gauge = to_string(gauge);
    rec.tail_model = to_string(tm);
    rec.lambda_tail = lam_tail;
    rec.iterations = static_cast<int>(rec.history.size());
    rec.outer_iterations = outer + 1;
    rec.residual_norm = out.residual;
    rec.converged = out.converged;
    if (!out.message.empty()) rec.message = rec.message.empty() ? out.message : rec.message + "; " + out.message;
    if (spec.mode == SolveMode::prescribed_origin && out.converged &&
        std::abs(lam_achieved - lam_tail) > 1e-8 * lambda_sph) {
        rec.converged = false;
        rec.message += fmt::format("tail fixed point not settled after {} outer iterations", rec.outer_iterations);
    }

    std::optional<Tail> tail;
    if (tm != TailModel::none && u.allFinite()) {
        try {
            tail = matched_tail(tm, spec.profile, lam_tail, D.grid->r_max(), u(u.size() - 1));
        } catch (const error&) {
        }
    }
    if (!u.allFinite()) u = to_eigen(u0.values());
    rec.u = RadialField(D.grid, to_std(u), tail);
    rec.c = c;
    if (rec.converged) {
        rec.Lambda = lam_achieved;
        try {
            auto sv = split_volumes(rec.u, spec.profile.p);
            rec.V0 = sv.V0;
            rec.Vp = sv.Vp;
        } catch (const divergent_tail&) {
            // a Gaussian-regularized K can carry Lambda below the slope at which e^{4u} is integrable
            rec.V0 = rec.Vp = std::numeric_limits<double>::infinity();
        }
        rec.lap0 = laplacian_at_origin(rec.u, spec.profile);
    } else {
        rec.Lambda = std::numeric_limits<double>::quiet_NaN();
    }
    return rec;
}

// Near the blow-up end dLambda/du(0) -> 0 and the Lambda-mode Jacobian degenerates
// along the concentration direction; u(0) stays a good coordinate there.
std::optional<SolutionRecord> solve_through_origin(const SolveSpec& spec, const Discretization& D,
                                                   const std::optional<RadialField>& guess) {
    SolveSpec s = spec;
    s.mode = SolveMode::prescribed_origin;
    s.gauge.reset();
    s.schedule.clear();
    s.expect_failure = false;
    s.lambda_hint = spec.target;

    std::optional<RadialField> g = guess;
    std::vector<SolutionRecord> solved;
    auto f = [&](double rho) {
        s.target = rho;
        // warm start from the nearest solved origin value
        std::optional<RadialField> w = g;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : solved)
            if (std::abs(r.u[0] - rho) < best) {
                best = std::abs(r.u[0] - rho);
                w = r.u;
                s.lambda_hint = r.Lambda;
            }
        auto r = solve_direct(s, D, w, std::nullopt);
        if (!r.converged) throw error(fmt::format("origin solve at u(0) = {:g} failed", rho));
        solved.push_back(r);
        return r.Lambda - spec.target;
    };

    try {
        double a = guess ? (*guess)[0] : default_guess(spec, D)[0];
        double fa = f(a);
        if (fa == 0.0) return solved.back();
        double step = fa < 0.0 ? 0.25 : -0.25;
        double b = a, fb = fa;
        for (int k = 0;; ++k) {
            if (k == 10) return std::nullopt;
            a = b;
            fa = fb;
            b = a + step;
            fb = f(b);
            if ((fa < 0.0) != (fb < 0.0)) break;
            step *= 2.0;
        }
        if (a > b) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        std::uintmax_t it = 60;
        auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-11; };
        boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, it);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    // best solved record
    const SolutionRecord* best = nullptr;
    for (const auto& r : solved)
        if (!best || std::abs(r.Lambda - spec.target) < std::abs(best->Lambda - spec.target)) best = &r;
    if (!best || std::abs(best->Lambda - spec.target) > 1e-9 * lambda_sph) return std::nullopt;
    return *best;
}

}  // namespace

SolutionRecord solve(const SolveSpec& spec, const Discretization& D, const std::optional<RadialField>& guess,
                     std::optional<double> c_guess) {
    auto rec = solve_direct(spec, D, guess, c_guess);
    if (rec.converged || rec.expect_failure || !spec.origin_fallback || spec.mode != SolveMode::prescribed_lambda ||
        spec.gauge)
        return rec;
    auto alt = solve_through_origin(spec, D, guess);
    if (!alt) {
        rec.message += "; origin-parametrized fallback failed";
        return rec;
    }
    SolutionRecord out = std::move(*alt);
    out.spec = spec;
    out.window_check = rec.window_check;
    out.branch = "origin-parametrized";
    out.message = fmt::format("Lambda-mode Newton stalled ({}); solved through u(0)", rec.message);
    out.history.insert(out.history.begin(), rec.history.begin(), rec.history.end());
    out.iterations = static_cast<int>(out.history.size());
    return out;
}

const char* to_string(PathParam p) {
    switch (p) {
        case PathParam::Lambda: return "Lambda";
        case PathParam::rho: return "rho";
        case PathParam::lambda: return "lambda";
        case PathParam::epsilon: return "epsilon";
    }
    return "?";
}

PathParam path_param_from_string(const std::string& s) {
    if (s == "Lambda") return PathParam::Lambda;
    if (s == "rho") return PathParam::rho;
    if (s == "lambda") return PathParam::lambda;
    if (s == "epsilon" || s == "eps") return PathParam::epsilon;
    throw domain_error("unknown path parameter '" + s + "'");
}

namespace {

SolveSpec with_param(SolveSpec s, PathParam p, double v) {
    switch (p) {
        case PathParam::Lambda:
            s.mode = SolveMode::prescribed_lambda;
            s.target = v;
            break;
        case PathParam::rho:
            s.mode = SolveMode::prescribed_origin;
            s.target = v;
            break;
        case PathParam::lambda: s.profile.lambda = v; break;
        case PathParam::epsilon: s.profile.eps = v; break;
    }
    s.schedule.clear();
    return s;
}

}  // namespace

std::vector<PathStep> continuation_path(const SolveSpec& base, PathParam param, const std::vector<double>& schedule,
                                        const Discretization& D, const std::optional<RadialField>& guess) {
    std::vector<PathStep> steps;
    std::optional<RadialField> g = guess;
    std::optional<double> cg;
    std::optional<double> lam;
    std::optional<double> prev;
    for (double v : schedule) {
        SolveSpec s = with_param(base, param, v);
        if (lam && s.mode == SolveMode::prescribed_origin) s.lambda_hint = lam;
        PathStep st;
        st.param = v;
        st.record = solve(s, D, g, cg);
        if (!st.record.converged && prev) {
            // one bisection of the failed interval
            SolveSpec mid = with_param(base, param, 0.5 * (*prev + v));
            if (lam && mid.mode == SolveMode::prescribed_origin) mid.lambda_hint = lam;
            auto rm = solve(mid, D, g, cg);
            st.bisected = true;
            if (rm.converged) {
                if (rm.spec.mode == SolveMode::prescribed_origin) s.lambda_hint = rm.Lambda;
                st.record = solve(s, D, rm.u, rm.c);
            }
            if (!st.record.converged) {
                auto rc = solve(s, D);
                st.restarted = true;
                if (rc.converged) st.record = std::move(rc);
            }
        }
        if (st.record.converged) {
            if (g && !st.restarted)
                st.record.branch = fmt::format("continuation from {}={:g}", to_string(param), *prev);
            g = st.record.u;
            cg = st.record.c;
            lam = st.record.Lambda;
            prev = v;
            if (param == PathParam::lambda) {
                double u0 = st.record.u[0];
                st.r_lambda = std::pow(s.profile.lambda * std::exp(4.0 * u0), -0.25);
                RadialField sc = scale_field(st.record.u, st.r_lambda);
                st.eta = shift_field(sc, -(u0 + std::log(st.r_lambda)));
            }
        }
        steps.push_back(std::move(st));
    }
    return steps;
}

double laplacian_at_origin(const RadialField& u, const CurvatureProfile& K) {
    const auto& g = u.grid();
    auto q = make_quadrature(g);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += q.w1[i] * K(g[i]) * std::exp(4.0 * u[i]);
    if (u.has_tail()) s += tail_moments(*u.tail(), K, g.r_max(), false).T2;
    return -0.5 * s;
}

double laplacian_at_origin(const SolutionRecord& rec) { return laplacian_at_origin(rec.u, rec.spec.profile); }

double covariance_rho(double mu, double p) {
    if (!(mu > 0.0) || !(p > 0.0)) throw domain_error("covariance scale needs mu > 0, p > 0");
    return std::pow(mu, -1.0 / p);
}

RadialField shift_field(const RadialField& u, double s) {
    std::vector<double> v = u.values();
    for (auto& x : v) x += s;
    std::optional<Tail> t = u.tail();
    if (t) {
        if (t->kind == Tail::Kind::power) {
            t->C += s;
        } else {
            t->mu *= std::exp(-4.0 * s);
            t->C = t->asymptotic_offset();
        }
    }
    return RadialField(u.grid_ptr(), std::move(v), t);
}

}  // namespace qcurv
