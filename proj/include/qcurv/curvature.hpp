#pragma once

#include <string>

#include "qcurv/radial.hpp"

namespace qcurv {

enum class ProfileKind { one_minus_rp, one_plus_rp, constant, regularized_lambda };

const char* to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

// K(r) = (a + b r^p) e^{-eps r^2}
//   one_minus_rp:        a = 1,      b = -mu
//   one_plus_rp:         a = 1,      b = +1
//   constant:            a = K0,     b = 0
//   regularized_lambda:  a = lambda, b = -1
struct CurvatureProfile {
    ProfileKind kind = ProfileKind::one_minus_rp;
    double p = 2.0;
    double K0 = 6.0;
    double lambda = 1.0;
    double eps = 0.0;
    double mu = 1.0;

    static CurvatureProfile one_minus(double p, double mu = 1.0);
    static CurvatureProfile one_plus(double p, double eps = 0.0);
    static CurvatureProfile constant(double K0);
    static CurvatureProfile regularized(double lambda, double p, double eps = 1.0);

    void validate() const;
    double a() const;
    double b() const;
    double operator()(double r) const;
    double r_dK(double r) const;  // r K'(r)
    bool has_power_term() const { return b() != 0.0; }
    int sign() const;  // sign of b; Pohozaev right-hand side carries it
};

struct Thresholds {
    double p;
    double sph;            // 16 pi^2
    double star;           // (4+p) 2 pi^2
    double two_star;       // 2 (4+p) 2 pi^2
    double p_quarter_sph;  // (p/4) 16 pi^2
};

Thresholds thresholds_for(double p);
inline constexpr double lambda_sph = 16.0 * pi * pi;

// Integrals of the tail model over (R, inf), in t = log s.
//   T0 = int K e^{4u} s^3 ds,  T1 = int K e^{4u} s^3 log s ds,  T2 = int K e^{4u} s ds
//   V0 = int e^{4u} s^3 ds,    Vp = int s^p e^{4u} s^3 ds
// d* are derivatives with respect to u(R) along the matched tail family.
struct TailMoments {
    double T0 = 0, T1 = 0, T2 = 0;
    double dT0 = 0, dT1 = 0, dT2 = 0;
    double V0 = 0, Vp = 0;
    bool has_log = false;
};

TailMoments tail_moments(const Tail& tail, const CurvatureProfile& K, double R, bool need_log = true);

enum class TailModel { automatic, power, liouville, none };

const char* to_string(TailModel m);
TailModel tail_model_from_string(const std::string& s);

// Resolved tail model for total curvature Lambda.
TailModel resolve_tail_model(TailModel requested, const CurvatureProfile& K, double Lambda);

// Tail with slope fixed by Lambda, matched so that tail(R) = uR.
Tail matched_tail(TailModel model, const CurvatureProfile& K, double Lambda, double R, double uR);

// Lambda = omega3 int K e^{4u} s^3 ds (grid part + tail part, grid only without tail).
double total_curvature(const RadialField& u, const CurvatureProfile& K);

struct SplitVolumes {
    double V0;
    double Vp;
};
SplitVolumes split_volumes(const RadialField& u, double p);

// omega3 int_0^delta K e^{4u} s^3 ds
double mass_in_ball(const RadialField& u, const CurvatureProfile& K, double delta);

// Composite Gauss-Legendre on [t0, inf) with geometrically growing panels;
// the range is cut at t0 + 60/rate (and t_cap).
template <class F>
double tail_integral(F&& f, double t0, double rate, double t_cap = 1e300);

}  // namespace qcurv

#include "qcurv/gauss.hpp"

namespace qcurv {

template <class F>
double tail_integral(F&& f, double t0, double rate, double t_cap) {
    double end = t0 + 60.0 / std::max(rate, 1e-12);
    if (end > t_cap) end = t_cap;
    double tot = 0.0, a = t0, h = 0.05;
    while (a < end) {
        double b = std::min(a + h, end);
        double hh = 0.5 * (b - a), m = 0.5 * (a + b);
        for (int q = 0; q < gauss8::n; ++q) tot += hh * gauss8::w[q] * f(m + hh * gauss8::x[q]);
        a = b;
        h *= 1.25;
    }
    return tot;
}

}  // namespace qcurv
