#pragma once

#include <array>

#include <boost/math/quadrature/gauss.hpp>

namespace qcurv::gauss8 {

inline constexpr int n = 8;

namespace detail {
struct Rule {
    std::array<double, n> x{}, w{};
    Rule() {
        using G = boost::math::quadrature::gauss<double, n>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        for (int i = 0; i < n / 2; ++i) {
            x[n / 2 - 1 - i] = -a[i];
            x[n / 2 + i] = a[i];
            w[n / 2 - 1 - i] = wt[i];
            w[n / 2 + i] = wt[i];
        }
    }
};
inline const Rule rule;
}  // namespace detail

inline const std::array<double, n>& x = detail::rule.x;
inline const std::array<double, n>& w = detail::rule.w;

}  // namespace qcurv::gauss8
