#pragma once

#include <optional>
#include <vector>

#include "qcurv/radial.hpp"
#include "qcurv/solver.hpp"

namespace qcurv {

struct PohozaevReport {
    double lhs = 0.0;       // (Lambda/Lsph)(Lambda - Lsph)
    double rhs = 0.0;       // +-(p/4) Vp, or (1/4) int r K'(r) e^{4u} in general
    double residual = 0.0;  // |lhs - rhs| / Lsph
    bool decay_ok = false;  // R^{4+p} e^{4u(R)} decreasing far out
    std::vector<std::pair<double, double>> decay_samples;
    bool applicable = false;
};

// Defaults to the record's profile; p-term sign from the profile.
PohozaevReport pohozaev_check(const SolutionRecord& rec);
PohozaevReport pohozaev_check(const RadialField& u, const CurvatureProfile& K, double Lambda);

struct SlopeFit {
    double sigma = 0.0;
    double offset = 0.0;
    double rms = 0.0;
    double target = 0.0;  // -Lambda / 8 pi^2 when known
};

// Least squares of u against log r on [r_max / 10^decades, r_max] (grid nodes only).
SlopeFit asymptotic_slope(const RadialField& u, double decades = 1.0);

struct KelvinField {
    RadialField field;
    double alpha = 0.0;
    double curvature_exponent = 0.0;  // 8 - 4 alpha
};

// u~(r) = u(1/r) - alpha log r on the reflected grid.
KelvinField kelvin_transform(const RadialField& u, double alpha);

struct BlowupReport {
    double u0 = 0.0;
    double r_k = 0.0;             // 12 e^{-u(0)}
    double deviation = 0.0;       // max |eta - log(2/(1+x^2))| on |x| <= 2 at r_k
    double fit_scale = 1.0;       // lambda minimizing the deviation of eta(x / lambda)
    double fit_deviation = 0.0;
    RadialField eta;              // on the model grid |x| <= 4
    std::vector<double> x;        // sample points of eta
    std::vector<double> eta_values;
};

BlowupReport blowup_rescale(const SolutionRecord& rec, int samples = 401);
BlowupReport blowup_rescale(const RadialField& u, int samples = 401);

struct LogLogFit {
    double coefficient = 0.0;  // beta in u + (1+p/4) log r = beta log log r + gamma
    double intercept = 0.0;
    double drift = 0.0;        // difference of per-decade fits
    std::vector<double> per_decade;
};

// Fit over [r_hi / 10^decades, r_hi]; samples the tail model beyond r_max.
LogLogFit loglog_coefficient(const RadialField& u, double p, double r_hi = 0.0, double decades = 2.0,
                             int samples_per_decade = 50);

struct DecayCheck {
    std::vector<std::pair<double, double>> samples;  // (R, R^{4+p} e^{4u(R)})
    bool decreasing = false;
};

DecayCheck decay_check(const RadialField& u, double p, double r_far = 0.0);

struct DiagnosticsReport {
    PohozaevReport pohozaev;
    SlopeFit slope;
    DecayCheck decay;
    std::optional<LogLogFit> loglog;
    std::optional<BlowupReport> blowup;
};

DiagnosticsReport diagnose(const SolutionRecord& rec, bool with_blowup = false, bool with_loglog = false);

}  // namespace qcurv
