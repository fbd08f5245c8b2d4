#pragma once

#include <string>

#include <Eigen/Dense>

#include "qcurv/radial.hpp"

namespace qcurv {

// absolute: log(1/|x-y|); origin: log(|y|/|x-y|)
enum class Gauge { absolute, origin };

const char* to_string(Gauge g);
Gauge gauge_from_string(const std::string& s);

// Spherical average over |y| = s of the gauged kernel.
double kernel_closed_form(double r, double s, Gauge gauge = Gauge::absolute);

struct OracleValue {
    double value;
    double error;
};

// Adaptive quadrature of (2/pi) int_0^pi sin^2 th log(1/|r e1 - s w|) dth.
OracleValue kernel_oracle(double r, double s, double tol = 1e-12);

// A_ij = (1/4) int G(r_i, s) phi_j(s) s^3 ds, so (A f)_i approximates
// (1/8 pi^2) int_{B_rmax} G(|x|,|y|) f(y) dy.
Eigen::MatrixXd assemble_operator(const RadialGrid& g, Gauge gauge, int threads = 1);

// Binary dump: "QKRN", uint64 n, uint32 gauge, n*n row-major float64.
void dump_operator(const Eigen::MatrixXd& A, Gauge gauge, const std::string& path);
Eigen::MatrixXd load_operator(const std::string& path, Gauge* gauge = nullptr);

}  // namespace qcurv
