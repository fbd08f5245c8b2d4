#pragma once

#include <string>
#include <vector>

#include "qcurv/curvature.hpp"

namespace qcurv {

enum class TerminalClass { normal_decay, quadratic_collapse, blow_up, inconclusive };

const char* to_string(TerminalClass c);

struct ShootSample {
    double r;
    double u, du, w, dw;  // w = Delta u
    double V0, Vp;        // int_{B_r} e^{4u}, int_{B_r} |x|^p e^{4u}
    double Lambda;        // int_{B_r} K e^{4u}
};

struct ShootOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int samples_per_decade = 20;
    std::vector<double> extra_radii;  // always sampled (sorted or not)
    double collapse_level = 1e-2;
    double normal_bound = 1e3;
};

struct ShootState {
    double a = 0.0, b = 0.0;
    double r_start = 0.0;
    double r_exit = 0.0;
    std::vector<ShootSample> trajectory;
    TerminalClass terminal = TerminalClass::inconclusive;
    std::string diagnostics;

    // sample at an extra radius (exact match required)
    const ShootSample* find(double r) const;
};

// Radial ODE u'' = w - 3u'/r, w'' = K e^{4u} - 3w'/r from the series start
// u = a + b r^2/8 + K(0)e^{4a} r^4/192, w = b + K(0)e^{4a} r^2/8.
ShootState shoot(double a, double b, const CurvatureProfile& K, double r_end, const ShootOptions& opt = {});

struct ProbeResult {
    TerminalClass terminal;
    std::vector<std::pair<double, double>> partial;  // (r, int_{B_r}(1+s^p)e^{4u})
    double last_increment;                           // Cauchy increment over the last decade
    double settle_radius;                            // first radius after which increments stay below tol
    bool settled;
};

ProbeResult finite_total_curvature_probe(double a, double b, const CurvatureProfile& K, double r_end,
                                         double tol = 1e-6, const ShootOptions& opt = {});

}  // namespace qcurv
