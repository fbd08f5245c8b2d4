#include "qcurv/curvature.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// int_{tR}^inf e^{c + k t} dt and int t e^{c + k t} dt, k < 0
double exp_int(double c, double k, double tR) { return -std::exp(c + k * tR) / k; }
double texp_int(double c, double k, double tR) { return std::exp(c + k * tR) * (-tR / k + 1.0 / (k * k)); }

}  // namespace

const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::one_minus_rp: return "one_minus_rp";
        case ProfileKind::one_plus_rp: return "one_plus_rp";
        case ProfileKind::constant: return "constant";
        case ProfileKind::regularized_lambda: return "regularized_lambda";
    }
    return "?";
}

ProfileKind profile_kind_from_string(const std::string& s) {
    if (s == "one_minus_rp") return ProfileKind::one_minus_rp;
    if (s == "one_plus_rp") return ProfileKind::one_plus_rp;
    if (s == "constant") return ProfileKind::constant;
    if (s == "regularized_lambda") return ProfileKind::regularized_lambda;
    throw domain_error("unknown profile kind '" + s + "'");
}

CurvatureProfile CurvatureProfile::one_minus(double p, double mu) {
    CurvatureProfile k;
    k.kind = ProfileKind::one_minus_rp;
    k.p = p;
    k.mu = mu;
    k.validate();
    return k;
}

CurvatureProfile CurvatureProfile::one_plus(double p, double eps) {
    CurvatureProfile k;
    k.kind = ProfileKind::one_plus_rp;
    k.p = p;
    k.eps = eps;
    k.validate();
    return k;
}

CurvatureProfile CurvatureProfile::constant(double K0) {
    CurvatureProfile k;
    k.kind = ProfileKind::constant;
    k.K0 = K0;
    k.validate();
    return k;
}

CurvatureProfile CurvatureProfile::regularized(double lambda, double p, double eps) {
    CurvatureProfile k;
    k.kind = ProfileKind::regularized_lambda;
    k.lambda = lambda;
    k.p = p;
    k.eps = eps;
    k.validate();
    return k;
}

void CurvatureProfile::validate() const {
    if (kind != ProfileKind::constant && !(p > 0.0)) throw domain_error(fmt::format("need p > 0, got {:g}", p));
    if (!(eps >= 0.0)) throw domain_error(fmt::format("need eps >= 0, got {:g}", eps));
    if (kind == ProfileKind::regularized_lambda && !(lambda > 0.0))
        throw domain_error(fmt::format("need lambda > 0, got {:g}", lambda));
    if (!(mu > 0.0)) throw domain_error(fmt::format("need mu > 0, got {:g}", mu));
}

double CurvatureProfile::a() const {
    switch (kind) {
        case ProfileKind::constant: return K0;
        case ProfileKind::regularized_lambda: return lambda;
        default: return 1.0;
    }
}

double CurvatureProfile::b() const {
    switch (kind) {
        case ProfileKind::one_minus_rp: return -mu;
        case ProfileKind::one_plus_rp: return 1.0;
        case ProfileKind::regularized_lambda: return -1.0;
        default: return 0.0;
    }
}

int CurvatureProfile::sign() const { return b() > 0 ? 1 : (b() < 0 ? -1 : 0); }

double CurvatureProfile::operator()(double r) const {
    double v = a();
    if (b() != 0.0) v += b() * std::pow(r, p);
    if (eps > 0.0) v *= std::exp(-eps * r * r);
    return v;
}

double CurvatureProfile::r_dK(double r) const {
    double rp = b() != 0.0 ? std::pow(r, p) : 0.0;
    double g = eps > 0.0 ? std::exp(-eps * r * r) : 1.0;
    return g * (p * b() * rp - 2.0 * eps * r * r * (a() + b() * rp));
}

Thresholds thresholds_for(double p) {
    if (!(p > 0.0)) throw domain_error(fmt::format("thresholds need p > 0, got {:g}", p));
    Thresholds t;
    t.p = p;
    t.sph = 16.0 * pi * pi;
    t.star = (4.0 + p) * 2.0 * pi * pi;
    t.two_star = 2.0 * t.star;
    t.p_quarter_sph = 0.25 * p * t.sph;
    return t;
}

const char* to_string(TailModel m) {
    switch (m) {
        case TailModel::automatic: return "auto";
        case TailModel::power: return "power";
        case TailModel::liouville: return "liouville";
        case TailModel::none: return "none";
    }
    return "?";
}

TailModel tail_model_from_string(const std::string& s) {
    if (s == "auto") return TailModel::automatic;
    if (s == "power") return TailModel::power;
    if (s == "liouville") return TailModel::liouville;
    if (s == "none") return TailModel::none;
    throw domain_error("unknown tail model '" + s + "'");
}

TailModel resolve_tail_model(TailModel requested, const CurvatureProfile& K, double Lambda) {
    bool liouville_ok = K.kind == ProfileKind::one_minus_rp && K.eps == 0.0;
    if (requested == TailModel::liouville && !liouville_ok)
        throw domain_error("liouville tail needs an unregularized 1 - mu r^p profile");
    if (requested != TailModel::automatic) return requested;
    if (liouville_ok && Lambda >= thresholds_for(K.p).star) return TailModel::liouville;
    return TailModel::power;
}

Tail matched_tail(TailModel model, const CurvatureProfile& K, double Lambda, double R, double uR) {
    double tR = std::log(R);
    model = resolve_tail_model(model, K, Lambda);
    if (model == TailModel::none) throw domain_error("no tail model requested");
    if (model == TailModel::power) {
        double sigma = -Lambda / (8.0 * pi * pi);
        return Tail::power(sigma, uR - sigma * tR);
    }
    double delta = (Lambda - thresholds_for(K.p).star) / (2.0 * pi * pi);
    if (delta < 0.0) throw divergent_tail(fmt::format("Lambda = {:g} below the integrability threshold", Lambda));
    double wR = 4.0 * uR + (4.0 + K.p) * tR + std::log(K.mu);
    double a = std::exp(-0.5 * wR) / std::sqrt(2.0);
    double tau = delta > 0.0 ? 2.0 * std::asinh(delta * a) / delta : 2.0 * a;
    return Tail::liouville(K.p, K.mu, delta, tR - tau);
}

TailMoments tail_moments(const Tail& tail, const CurvatureProfile& K, double R, bool need_log) {
    TailMoments m;
    double tR = std::log(R);
    double a = K.a(), b = K.b(), p = K.p;

    if (tail.kind == Tail::Kind::power) {
        double c = 4.0 * tail.C;
        double ka = 4.0 * tail.sigma + 4.0, kb = ka + p;
        if (K.eps == 0.0) {
            if (ka >= 0.0 || (b != 0.0 && kb >= 0.0))
                throw divergent_tail(fmt::format("tail slope {:g} not integrable against K (p = {:g})", tail.sigma, p));
            m.V0 = exp_int(c, ka, tR);
            m.Vp = kb < 0.0 ? exp_int(c, kb, tR) : inf;
            m.T0 = a * m.V0 + (b != 0.0 ? b * m.Vp : 0.0);
            m.T2 = a * exp_int(c, ka - 2.0, tR) + (b != 0.0 ? b * exp_int(c, kb - 2.0, tR) : 0.0);
            if (need_log) {
                m.T1 = a * texp_int(c, ka, tR) + (b != 0.0 ? b * texp_int(c, kb, tR) : 0.0);
                m.has_log = true;
            }
        } else {
            double tg = 0.5 * std::log(750.0 / K.eps);
            if (tR < tg) {
                double rate = std::max(-kb, 0.0);
                double cap = tg;
                auto E = [&](double t) { return std::exp(c + ka * t); };
                auto Kt = [&](double t) { return K(std::exp(t)); };
                m.V0 = tail_integral([&](double t) { return E(t) * std::exp(-K.eps * std::exp(2 * t)); }, tR, rate, cap);
                m.Vp = tail_integral([&](double t) { return E(t) * std::exp(p * t - K.eps * std::exp(2 * t)); }, tR, rate, cap);
                m.T0 = tail_integral([&](double t) { return Kt(t) * E(t); }, tR, rate, cap);
                m.T2 = tail_integral([&](double t) { return Kt(t) * E(t) * std::exp(-2 * t); }, tR, rate + 2, cap);
                if (need_log) m.T1 = tail_integral([&](double t) { return t * Kt(t) * E(t); }, tR, rate, cap);
            }
            m.has_log = need_log;
        }
        m.dT0 = 4.0 * m.T0;
        m.dT1 = 4.0 * m.T1;
        m.dT2 = 4.0 * m.T2;
        return m;
    }

    // liouville: s^3 e^{4u} ds = E dt with E = e^{w - p t} / mu, and s^p E = e^w / mu
    double d = tail.delta, mu = tail.mu;
    p = tail.p;
    double tau = tR - tail.t0;
    auto ew = [&](double t) { return std::exp(liouville_w(d, t - tail.t0)); };
    auto wp = [&](double t) { return liouville_dw(d, t - tail.t0); };
    double ewR = ew(tR), wpR = wp(tR);
    double Iw = d > 0.0 ? 2.0 * d / std::expm1(d * tau) : 2.0 / tau;
    auto E = [&](double t) { return ew(t) * std::exp(-p * t) / mu; };
    auto g = [&](double t) { return a * E(t) + b * ew(t) / mu; };
    double D = 4.0 / wpR;

    m.V0 = tail_integral(E, tR, p + d);
    m.Vp = Iw / mu;
    m.T0 = a * m.V0 + b * m.Vp;
    m.T2 = tail_integral([&](double t) { return g(t) * std::exp(-2.0 * t); }, tR, 2.0 + d);
    double dV0 = D * tail_integral([&](double t) { return E(t) * wp(t); }, tR, p + d);
    double dVp = -4.0 * ewR / (wpR * mu);
    m.dT0 = a * dV0 + b * dVp;
    m.dT2 = D * tail_integral([&](double t) { return g(t) * wp(t) * std::exp(-2.0 * t); }, tR, 2.0 + d);
    if (need_log) {
        if (!(d > 0.0)) throw divergent_tail("log moment of the tail diverges at the threshold");
        m.T1 = tail_integral([&](double t) { return t * g(t); }, tR, d);
        m.dT1 = D * tail_integral([&](double t) { return t * g(t) * wp(t); }, tR, d);
        m.has_log = true;
    }
    return m;
}

double total_curvature(const RadialField& u, const CurvatureProfile& K) {
    const auto& g = u.grid();
    auto q = make_quadrature(g);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += q.w3[i] * K(g[i]) * std::exp(4.0 * u[i]);
    if (u.has_tail()) s += tail_moments(*u.tail(), K, g.r_max(), false).T0;
    return omega3 * s;
}

SplitVolumes split_volumes(const RadialField& u, double p) {
    const auto& g = u.grid();
    auto q = make_quadrature(g);
    double v0 = 0.0, vp = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double e = std::exp(4.0 * u[i]);
        v0 += q.w3[i] * e;
        vp += q.w3[i] * std::pow(g[i], p) * e;
    }
    if (u.has_tail()) {
        // volumes do not depend on K beyond p
        auto tm = tail_moments(*u.tail(), CurvatureProfile::one_plus(p), g.r_max(), false);
        v0 += tm.V0;
        vp += tm.Vp;
    }
    return {omega3 * v0, omega3 * vp};
}

double mass_in_ball(const RadialField& u, const CurvatureProfile& K, double delta) {
    const auto& g = u.grid();
    double R = g.r_max();
    auto f = [&](double s) { return K(s) * std::exp(4.0 * u.at(s)) * s * s * s; };
    auto gl = [&](double a, double b) {
        double h = 0.5 * (b - a), m = 0.5 * (a + b), t = 0.0;
        for (int q = 0; q < gauss8::n; ++q) t += h * gauss8::w[q] * f(m + h * gauss8::x[q]);
        return t;
    };
    double lim = std::min(delta, R);
    std::vector<double> fv(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) fv[i] = K(g[i]) * std::exp(4.0 * u[i]);
    std::size_t k = g.locate(lim);
    if (lim >= R) k = g.last();
    double s = 0.0;
    for (const auto& m : panel_moments(g))
        if (m.sub < k) s += m.m3 * fv[m.node];
    if (lim > g[k]) s += gl(g[k], lim);
    if (delta > R) {
        if (!u.has_tail()) throw domain_error("ball extends beyond r_max and field has no tail");
        double tR = std::log(R), tD = std::log(delta);
        s += tail_integral([&](double t) { return f(std::exp(t)) * std::exp(t); }, tR, 1e-12, tD);
    }
    return omega3 * s;
}

}  // namespace qcurv
