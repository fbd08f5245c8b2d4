#include "qcurv/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qcurv/errors.hpp"
#include "qcurv/gauss.hpp"

namespace qcurv {

RadialGrid::RadialGrid(std::vector<double> nodes, std::string descriptor)
    : r_(std::move(nodes)), desc_(std::move(descriptor)) {
    if (r_.size() < 4) throw invalid_grid(fmt::format("grid needs at least 4 nodes, got {}", r_.size()));
    if (r_.front() != 0.0) throw invalid_grid("grid must start at the origin");
    for (std::size_t i = 1; i < r_.size(); ++i)
        if (!(r_[i] > r_[i - 1])) throw invalid_grid(fmt::format("nodes not increasing at {}", i));
}

GridPtr RadialGrid::make(const GridParams& gp) {
    if (!(gp.r_max > gp.r_min) || gp.r_min <= 0.0) throw invalid_grid("need 0 < r_min < r_max");
    if (gp.patch < 1 || gp.nodes < gp.patch + 4) throw invalid_grid("too few nodes");
    int n = gp.nodes + (gp.nodes % 2);
    int ng = n - gp.patch;
    std::vector<double> r;
    r.reserve(n + 1);
    for (int i = 0; i < gp.patch; ++i) r.push_back(gp.r_min * i / gp.patch);
    double a = std::log(gp.r_min), b = std::log(gp.r_max);
    for (int i = 0; i <= ng; ++i) r.push_back(std::exp(a + (b - a) * i / ng));
    r.back() = gp.r_max;
    double per_decade = ng / std::log10(gp.r_max / gp.r_min);
    if (per_decade < 2.0) throw invalid_grid("fewer than 2 nodes per decade");
    return std::make_shared<const RadialGrid>(
        std::move(r), fmt::format("linear[0,{:g}]x{} + geometric[{:g},{:g}]x{}", gp.r_min, gp.patch,
                                  gp.r_min, gp.r_max, ng));
}

std::size_t RadialGrid::locate(double r) const {
    auto it = std::upper_bound(r_.begin(), r_.end(), r);
    std::size_t k = it == r_.begin() ? 0 : static_cast<std::size_t>(it - r_.begin()) - 1;
    return std::min(k, r_.size() - 2);
}

// ---- tails ----

Tail Tail::power(double sigma, double C) {
    Tail t;
    t.kind = Kind::power;
    t.sigma = sigma;
    t.C = C;
    return t;
}

Tail Tail::liouville(double p, double mu, double delta, double t0) {
    Tail t;
    t.kind = Kind::liouville;
    t.p = p;
    t.mu = mu;
    t.delta = delta;
    t.t0 = t0;
    t.sigma = -(4.0 + p + delta) / 4.0;
    t.C = t.asymptotic_offset();
    return t;
}

double liouville_w(double delta, double x) {
    if (delta == 0.0) return std::log(2.0 / (x * x));
    double y = 0.5 * delta * x;
    double log_sinh = y + std::log(-std::expm1(-2.0 * y)) - std::log(2.0);
    return std::log(0.5 * delta * delta) - 2.0 * log_sinh;
}

double liouville_dw(double delta, double x) {
    if (delta == 0.0) return -2.0 / x;
    return -delta / std::tanh(0.5 * delta * x);
}

double Tail::value(double r) const {
    double t = std::log(r);
    if (kind == Kind::power) return sigma * t + C;
    return (liouville_w(delta, t - t0) - (4.0 + p) * t - std::log(mu)) / 4.0;
}

double Tail::log_slope(double r) const {
    if (kind == Kind::power) return sigma;
    return (liouville_dw(delta, std::log(r) - t0) - (4.0 + p)) / 4.0;
}

double Tail::asymptotic_slope() const {
    return kind == Kind::power ? sigma : -(4.0 + p + delta) / 4.0;
}

double Tail::asymptotic_offset() const {
    if (kind == Kind::power) return C;
    if (delta <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (std::log(2.0 * delta * delta) + delta * t0 - std::log(mu)) / 4.0;
}

// ---- fields ----

RadialField::RadialField(GridPtr grid, std::vector<double> values, std::optional<Tail> tail)
    : grid_(std::move(grid)), v_(std::move(values)), tail_(tail) {
    if (!grid_) throw invalid_grid("field without grid");
    if (v_.size() != grid_->size())
        throw invalid_grid(fmt::format("field has {} values for {} nodes", v_.size(), grid_->size()));
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (!std::isfinite(v_[i])) throw domain_error(fmt::format("non-finite value at node {}", i));
}

double RadialField::at(double r) const {
    const auto& g = *grid_;
    if (r < 0.0) r = -r;
    if (r > g.r_max()) {
        if (!tail_) throw domain_error(fmt::format("r = {:g} beyond r_max and field has no tail", r));
        return tail_->value(r);
    }
    std::size_t k = g.locate(r);
    std::size_t lo = k == 0 ? 0 : k - 1;
    if (lo + 3 > g.last()) lo = g.last() - 3;
    double s = 0.0;
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double L = 1.0;
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) L *= (r - g[b]) / (g[a] - g[b]);
        s += L * v_[a];
    }
    return s;
}

double RadialField::tail_mismatch() const {
    if (!tail_) return 0.0;
    return std::abs(v_.back() - tail_->value(grid_->r_max()));
}

// ---- quadrature ----

std::vector<SubMoment> panel_moments(const RadialGrid& g) {
    const auto& r = g.nodes();
    std::size_t N = g.last();
    std::vector<SubMoment> out;
    out.reserve(3 * N);
    auto add = [&](std::size_t sub, const std::vector<std::size_t>& nodes) {
        double a = r[sub], b = r[sub + 1];
        double h = 0.5 * (b - a), m = 0.5 * (a + b);
        for (std::size_t bi = 0; bi < nodes.size(); ++bi) {
            SubMoment sm{sub, nodes[bi], 0, 0, 0, 0, 0};
            for (int q = 0; q < gauss8::n; ++q) {
                double s = m + h * gauss8::x[q];
                double w = h * gauss8::w[q];
                double L = 1.0;
                for (std::size_t bj = 0; bj < nodes.size(); ++bj)
                    if (bj != bi) L *= (s - r[nodes[bj]]) / (r[nodes[bi]] - r[nodes[bj]]);
                double wl = w * L, s2 = s * s, s3 = s2 * s;
                sm.m0 += wl;
                sm.m1 += wl * s;
                sm.m3 += wl * s3;
                sm.m5 += wl * s3 * s2;
                sm.l3 += wl * s3 * std::log(s);
            }
            out.push_back(sm);
        }
    };
    std::size_t k = 0;
    while (k < N) {
        if (k + 2 <= N) {
            add(k, {k, k + 1, k + 2});
            add(k + 1, {k, k + 1, k + 2});
            k += 2;
        } else {
            add(k, {k, k + 1});
            k += 1;
        }
    }
    return out;
}

QuadratureRule make_quadrature(const RadialGrid& g) {
    QuadratureRule q;
    std::size_t n = g.size();
    q.w0.assign(n, 0.0);
    q.w1.assign(n, 0.0);
    q.w3.assign(n, 0.0);
    q.w5.assign(n, 0.0);
    for (const auto& m : panel_moments(g)) {
        q.w0[m.node] += m.m0;
        q.w1[m.node] += m.m1;
        q.w3[m.node] += m.m3;
        q.w5[m.node] += m.m5;
    }
    return q;
}

double QuadratureRule::integrate_s3(const std::vector<double>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w3[i] * f[i];
    return s;
}

// ---- radial calculus ----

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& xs, int m) {
    // Fornberg, Math. Comp. 51 (1988)
    int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

RadialField radial_laplacian(const RadialField& f) {
    const auto& g = f.grid();
    std::size_t N = g.last();
    std::vector<double> out(g.size());
    // even extension: u'(0)=0, Delta u(0) = 4 u''(0)
    out[0] = 8.0 * (f[1] - f[0]) / (g[1] * g[1]);
    for (std::size_t i = 1; i <= N; ++i) {
        std::size_t lo = i < N ? i - 1 : N - 3;
        std::size_t cnt = i < N ? 3 : 4;
        std::vector<double> xs(g.nodes().begin() + lo, g.nodes().begin() + lo + cnt);
        auto c = fd_weights(g[i], xs, 2);
        double d1 = 0.0, d2 = 0.0;
        // differences against f_i: constants vanish exactly
        for (std::size_t k = 0; k < cnt; ++k) {
            d1 += c[1][k] * (f[lo + k] - f[i]);
            d2 += c[2][k] * (f[lo + k] - f[i]);
        }
        out[i] = d2 + 3.0 * d1 / g[i];
    }
    return RadialField(f.grid_ptr(), std::move(out));
}

RadialField reconstruct_from_laplacian(const RadialField& w, double f0) {
    const auto& g = w.grid();
    std::size_t n = g.size();
    auto mom = panel_moments(g);
    // M(t) = int_0^t w s^3 ds at every node
    std::vector<double> sub_mass(n - 1, 0.0);
    for (const auto& m : mom) sub_mass[m.sub] += m.m3 * w[m.node];
    std::vector<double> M(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) M[k + 1] = M[k] + sub_mass[k];
    // f' = M / t^3, with M ~ w(0) t^4/4 near the origin
    std::vector<double> slope(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) slope[i] = M[i] / (g[i] * g[i] * g[i]);
    std::vector<double> sub_rise(n - 1, 0.0);
    for (const auto& m : mom) sub_rise[m.sub] += m.m0 * slope[m.node];
    std::vector<double> f(n, f0);
    for (std::size_t k = 0; k + 1 < n; ++k) f[k + 1] = f[k] + sub_rise[k];
    return RadialField(w.grid_ptr(), std::move(f));
}

RadialField scale_field(const RadialField& u, double rho) {
    if (!(rho > 0.0)) throw domain_error(fmt::format("scale factor must be positive, got {:g}", rho));
    const auto& g = u.grid();
    double lr = std::log(rho);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = u.at(rho * g[i]) + lr;
    std::optional<Tail> t = u.tail();
    if (t) {
        if (t->kind == Tail::Kind::power) {
            t->C += (t->sigma + 1.0) * lr;
        } else {
            t->mu *= std::pow(rho, t->p);
            t->t0 -= lr;
            t->C = t->asymptotic_offset();
        }
    }
    return RadialField(u.grid_ptr(), std::move(v), t);
}

}  // namespace qcurv
