#pragma once

#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace qcurv {

inline constexpr double pi = std::numbers::pi;
inline constexpr double omega3 = 2.0 * pi * pi;  // |S^3|

struct GridParams {
    double r_max = 1e3;
    double r_min = 1e-4;  // start of the geometric part
    int nodes = 1200;     // intervals, rounded up to even
    int patch = 4;        // linear intervals on [0, r_min]
};

class RadialGrid {
public:
    RadialGrid(std::vector<double> nodes, std::string descriptor);

    static std::shared_ptr<const RadialGrid> make(const GridParams& gp);

    const std::vector<double>& nodes() const { return r_; }
    double operator[](std::size_t i) const { return r_[i]; }
    std::size_t size() const { return r_.size(); }
    std::size_t last() const { return r_.size() - 1; }
    double r_max() const { return r_.back(); }
    const std::string& descriptor() const { return desc_; }

    // index k with r_k <= r < r_{k+1}, clamped to [0, last()-1]
    std::size_t locate(double r) const;

private:
    std::vector<double> r_;
    std::string desc_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Asymptotic model of u beyond r_max.
//   power:     u = sigma log r + C
//   liouville: u = (W(log r - t0) - (4+p) log r - log mu) / 4,
//              e^{W(x)} = delta^2 / (2 sinh^2(delta x / 2))   (2/x^2 at delta = 0)
struct Tail {
    enum class Kind { power, liouville };
    Kind kind = Kind::power;
    double sigma = 0.0, C = 0.0;
    double p = 0.0, mu = 1.0, delta = 0.0, t0 = 0.0;

    static Tail power(double sigma, double C);
    static Tail liouville(double p, double mu, double delta, double t0);

    double value(double r) const;
    double log_slope(double r) const;  // du / d log r

    // (sigma, C) of the leading log asymptote; C is NaN when delta == 0
    double asymptotic_slope() const;
    double asymptotic_offset() const;
};

// W(x) and W'(x) of the liouville profile, x > 0
double liouville_w(double delta, double x);
double liouville_dw(double delta, double x);

class RadialField {
public:
    RadialField() = default;
    RadialField(GridPtr grid, std::vector<double> values, std::optional<Tail> tail = std::nullopt);

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return v_; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::size_t size() const { return v_.size(); }
    const std::optional<Tail>& tail() const { return tail_; }
    bool has_tail() const { return tail_.has_value(); }

    // cubic Lagrange on the grid, tail model beyond r_max
    double at(double r) const;

    // |u(r_max) - tail(r_max)|
    double tail_mismatch() const;

private:
    GridPtr grid_;
    std::vector<double> v_;
    std::optional<Tail> tail_;
};

// Product-integration moments of the piecewise quadratic basis.
// Panels (0,1,2),(2,3,4),...; a trailing odd interval is linear.
struct SubMoment {
    std::size_t sub;   // interval [r_sub, r_sub+1]
    std::size_t node;  // basis function index
    double m0, m1, m3, m5, l3;  // int phi s^k ds, l3 = int phi s^3 log s ds
};

std::vector<SubMoment> panel_moments(const RadialGrid& g);

struct QuadratureRule {
    std::vector<double> w0, w1, w3, w5;  // int f s^k ds over [0, r_max]
    double sphere_area = omega3;

    double integrate_s3(const std::vector<double>& f) const;
};

QuadratureRule make_quadrature(const RadialGrid& g);

// Finite-difference weights (Fornberg) for derivatives 0..m at x0.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& xs, int m);

RadialField radial_laplacian(const RadialField& f);
RadialField reconstruct_from_laplacian(const RadialField& w, double f0);
RadialField scale_field(const RadialField& u, double rho);

}  // namespace qcurv
