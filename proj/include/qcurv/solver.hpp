#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcurv/curvature.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/radial.hpp"

namespace qcurv {

// Grid, quadrature and absolute-gauge operator, shared by every solve on the grid.
struct Discretization {
    GridParams params;
    GridPtr grid;
    QuadratureRule quad;
    Eigen::MatrixXd A;
    Eigen::VectorXd r2, w1, w3;

    static std::shared_ptr<const Discretization> build(const GridParams& gp, int threads = 1);
    std::size_t size() const { return grid->size(); }
};

using DiscPtr = std::shared_ptr<const Discretization>;

enum class SolveMode { prescribed_lambda, prescribed_origin };

struct SolveSpec {
    CurvatureProfile profile;
    SolveMode mode = SolveMode::prescribed_lambda;
    double target = 140.0;  // Lambda or rho
    double damping = 1.0;   // largest Newton step fraction
    double theta_min = 1.0 / 64.0;
    double newton_tol = 1e-10;
    int max_iter = 60;
    int max_outer = 5;
    TailModel tail = TailModel::automatic;
    std::optional<Gauge> gauge;          // default: absolute for Lambda, origin for rho
    bool expect_failure = false;
    std::optional<double> lambda_hint;   // tail slope seed in rho mode
    std::vector<double> schedule;        // intermediate targets, warm-started in order
    bool origin_fallback = true;         // Lambda mode: on failure, root-find u(0) with origin-prescribed solves
};

struct IterationLog {
    int outer;
    int iter;
    double residual;
    double theta;
    double u0;
};

struct SolutionRecord {
    SolveSpec spec;
    RadialField u;
    double c = 0.0;
    double Lambda = 0.0;
    double V0 = 0.0, Vp = 0.0;
    double lap0 = 0.0;
    double lambda_tail = 0.0;  // Lambda fixing the tail slope
    int iterations = 0;
    int outer_iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
    bool expect_failure = false;
    std::string window_check;
    std::string gauge;
    std::string tail_model;
    std::string branch;
    std::string message;
    std::vector<IterationLog> history;
};

std::string window_check(const CurvatureProfile& K, SolveMode mode, double target);

// u = log(2l / (1 + l^2 r^2)) + shift
RadialField spherical_field(GridPtr grid, double l, double shift);

// Heuristic spherical start for a spec; l_factor rescales the bubble width.
RadialField default_guess(const SolveSpec& spec, const Discretization& D, double l_factor = 1.0);

// F(u, c) on all nodes (absolute gauge, c free) or origin gauge with c = u(0);
// lambda_tail fixes the tail slope (defaults to the target in Lambda mode).
RadialField residual(const RadialField& u, double c, const SolveSpec& spec, const Discretization& D,
                     std::optional<double> lambda_tail = std::nullopt);

// Newton system in packed unknowns, exposed for Jacobian checks.
struct NewtonSystem {
    Eigen::VectorXd x;
    Eigen::VectorXd F;
    Eigen::MatrixXd J;
};
NewtonSystem newton_system(const RadialField& u, double c, const SolveSpec& spec, const Discretization& D,
                           double lambda_tail, const Eigen::VectorXd* x_override = nullptr);

SolutionRecord solve(const SolveSpec& spec, const Discretization& D,
                     const std::optional<RadialField>& guess = std::nullopt, std::optional<double> c_guess = std::nullopt);

enum class PathParam { Lambda, rho, lambda, epsilon };
const char* to_string(PathParam p);
PathParam path_param_from_string(const std::string& s);

struct PathStep {
    double param;
    SolutionRecord record;
    std::optional<RadialField> eta;  // lambda path: u(r_l x) - u(0)
    double r_lambda = 0.0;           // lambda r_l^4 e^{4u(0)} = 1
    bool bisected = false;
    bool restarted = false;  // warm start and bisection failed; solved from the default guess
};

std::vector<PathStep> continuation_path(const SolveSpec& base, PathParam param, const std::vector<double>& schedule,
                                        const Discretization& D, const std::optional<RadialField>& guess = std::nullopt);

// Delta u(0) = -(1/2) int_0^inf s K e^{4u} ds
double laplacian_at_origin(const SolutionRecord& rec);
double laplacian_at_origin(const RadialField& u, const CurvatureProfile& K);

// Scale mapping a solution for 1 - mu r^p to one for 1 - r^p: u(x) = eta(rho x) + log rho.
double covariance_rho(double mu, double p);

// u + s with the tail shifted accordingly.
RadialField shift_field(const RadialField& u, double s);

}  // namespace qcurv
