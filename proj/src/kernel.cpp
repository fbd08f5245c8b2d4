#include "qcurv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "qcurv/errors.hpp"

namespace qcurv {

const char* to_string(Gauge g) { return g == Gauge::absolute ? "absolute" : "origin"; }

Gauge gauge_from_string(const std::string& s) {
    if (s == "absolute") return Gauge::absolute;
    if (s == "origin") return Gauge::origin;
    throw domain_error("unknown gauge '" + s + "'");
}

double kernel_closed_form(double r, double s, Gauge gauge) {
    if (!(s > 0.0)) throw domain_error(fmt::format("kernel needs s > 0, got {:g}", s));
    if (r < 0.0) throw domain_error(fmt::format("kernel needs r >= 0, got {:g}", r));
    double hi = std::max(r, s), lo = std::min(r, s);
    double q = lo / hi;
    double g = -std::log(hi) - 0.25 * q * q;
    return gauge == Gauge::origin ? g + std::log(s) : g;
}

OracleValue kernel_oracle(double r, double s, double tol) {
    if (!(s > 0.0) || r < 0.0) throw domain_error("oracle needs r >= 0, s > 0");
    // log(1/|re1 - sw|) = -0.5 log(r^2 + s^2 - 2 r s cos th); at r = s use 2 r^2 (1 - cos th)
    // = 4 r^2 sin^2(th/2) so the singularity is handled in closed form inside the log.
    auto f = [r, s](double th) {
        double d2;
        if (r == s) {
            double h = std::sin(0.5 * th);
            d2 = 4.0 * r * r * h * h;
        } else {
            double c = std::cos(th);
            d2 = (r - s) * (r - s) + 2.0 * r * s * (1.0 - c);
        }
        double sn = std::sin(th);
        return (2.0 / pi) * sn * sn * (-0.5 * std::log(d2));
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0;
    double v = 0.0;
    if (r == s) {
        // log singularity at th = 0: split
        double e1 = 0.0, e2 = 0.0;
        v = GK::integrate(f, 0.0, 0.1, 30, tol, &e1) + GK::integrate(f, 0.1, pi, 30, tol, &e2);
        err = e1 + e2;
    } else {
        v = GK::integrate(f, 0.0, pi, 30, tol, &err);
    }
    if (!(err <= 1e-10)) throw oracle_failure("kernel oracle did not converge", err);
    return {v, err};
}

Eigen::MatrixXd assemble_operator(const RadialGrid& g, Gauge gauge, int threads) {
    std::size_t n = g.size();
    auto mom = panel_moments(g);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    auto rows = [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            double ri = g[i];
            double lr = ri > 0.0 ? std::log(ri) : 0.0;
            for (const auto& m : mom) {
                double v;
                if (ri > 0.0 && g[m.sub + 1] <= ri)
                    v = -lr * m.m3 - m.m5 / (4.0 * ri * ri);
                else
                    v = -m.l3 - 0.25 * ri * ri * m.m1;
                A(i, m.node) += 0.25 * v;
            }
        }
    };
    int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (nt == 1) {
        rows(0, n);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(rows, n * t / nt, n * (t + 1) / nt);
        for (auto& th : pool) th.join();
    }
    if (gauge == Gauge::origin) {
        Eigen::RowVectorXd r0 = A.row(0);
        A.rowwise() -= r0;
    }
    return A;
}

void dump_operator(const Eigen::MatrixXd& A, Gauge gauge, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open " + path);
    std::uint64_t n = static_cast<std::uint64_t>(A.rows());
    std::uint32_t gt = gauge == Gauge::absolute ? 0u : 1u;
    os.write("QKRN", 4);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(&gt), sizeof gt);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = A;
    os.write(reinterpret_cast<const char*>(R.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
    if (!os) throw io_error("write failed: " + path);
}

Eigen::MatrixXd load_operator(const std::string& path, Gauge* gauge) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open " + path);
    char magic[4];
    std::uint64_t n = 0;
    std::uint32_t gt = 0;
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "QKRN", 4) != 0) throw io_error("bad magic in " + path);
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    is.read(reinterpret_cast<char*>(&gt), sizeof gt);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R(n, n);
    is.read(reinterpret_cast<char*>(R.data()), static_cast<std::streamsize>(sizeof(double) * n * n));
    if (!is) throw io_error("truncated matrix file " + path);
    if (gauge) *gauge = gt == 0 ? Gauge::absolute : Gauge::origin;
    return R;
}

}  // namespace qcurv
