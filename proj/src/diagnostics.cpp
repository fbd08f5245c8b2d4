#include "qcurv/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

// (slope, intercept, rms) of y ~ slope x + intercept
std::array<double, 3> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    double k = (n * sxy - sx * sy) / den;
    double c = (sy - k * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - k * x[i] - c, 2);
    return {k, c, std::sqrt(ss / n)};
}

double model_profile(double x) { return std::log(2.0 / (1.0 + x * x)); }

}  // namespace

DecayCheck decay_check(const RadialField& u, double p, double r_far) {
    DecayCheck dc;
    double R = u.grid().r_max();
    double hi = r_far > 0.0 ? r_far : (u.has_tail() ? R * 1e6 : R);
    double lo = R / 10.0;
    int n = 40;
    for (int i = 0; i <= n; ++i) {
        double r = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        dc.samples.emplace_back(r, std::exp((4.0 + p) * std::log(r) + 4.0 * u.at(r)));
    }
    dc.decreasing = true;
    for (std::size_t i = 1; i < dc.samples.size(); ++i)
        dc.decreasing = dc.decreasing && dc.samples[i].second <= dc.samples[i - 1].second * (1.0 + 1e-12);
    return dc;
}

PohozaevReport pohozaev_check(const RadialField& u, const CurvatureProfile& K, double Lambda) {
    PohozaevReport pr;
    pr.lhs = Lambda / lambda_sph * (Lambda - lambda_sph);
    if (K.eps == 0.0) {
        if (K.has_power_term()) {
            double Vp = split_volumes(u, K.p).Vp;
            // K = a + b r^p: (1/4) int r K' e^{4u} dx = (p/4) b Vp
            pr.rhs = 0.25 * K.p * K.b() * Vp;
        }
    } else {
        // general form (1/4) int r K'(r) e^{4u} dx, grid part only (tail negligible under e^{-eps r^2})
        const auto& g = u.grid();
        auto q = make_quadrature(g);
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += q.w3[i] * K.r_dK(g[i]) * std::exp(4.0 * u[i]);
        pr.rhs = 0.25 * omega3 * s;
    }
    pr.residual = std::abs(pr.lhs - pr.rhs) / lambda_sph;
    double p = K.has_power_term() ? K.p : 0.0;
    auto dc = decay_check(u, p);
    pr.decay_samples = dc.samples;
    pr.decay_ok = dc.decreasing;
    pr.applicable = dc.decreasing;
    return pr;
}

PohozaevReport pohozaev_check(const SolutionRecord& rec) {
    if (!rec.converged) throw domain_error("Pohozaev check needs a converged record");
    return pohozaev_check(rec.u, rec.spec.profile, rec.Lambda);
}

SlopeFit asymptotic_slope(const RadialField& u, double decades) {
    const auto& g = u.grid();
    double lo = g.r_max() / std::pow(10.0, decades);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] >= lo * (1 - 1e-12)) {
            x.push_back(std::log(g[i]));
            y.push_back(u[i]);
        }
    if (x.size() < 2) throw domain_error("slope fit window holds fewer than 2 nodes");
    auto [k, c, rms] = linear_fit(x, y);
    SlopeFit sf;
    sf.sigma = k;
    sf.offset = c;
    sf.rms = rms;
    return sf;
}

KelvinField kelvin_transform(const RadialField& u, double alpha) {
    if (!u.has_tail()) throw domain_error("Kelvin transform needs a field with a tail");
    const auto& g = u.grid();
    std::size_t n = g.size();
    std::vector<double> r(n), v(n);
    r[0] = 0.0;
    // the origin of the image is the asymptotic constant of u + alpha log r
    const Tail& t = *u.tail();
    double C = t.asymptotic_offset();
    if (!std::isfinite(C) || std::abs(t.asymptotic_slope() + alpha) > 1e-9) {
        // limit of u(1/r) - alpha log r as r -> 0 evaluated through the tail model
        double big = g.r_max() * 1e12;
        C = t.value(big) + alpha * std::log(big);
    }
    v[0] = C;
    for (std::size_t j = 1; j < n; ++j) {
        std::size_t i = n - j;  // reflected node
        r[j] = 1.0 / g[i];
        v[j] = u[i] + alpha * std::log(g[i]);
    }
    auto rg = std::make_shared<const RadialGrid>(std::move(r), "reflected(" + g.descriptor() + ")");
    // beyond 1/r_1 the image follows u(0) - alpha log r
    KelvinField kf{RadialField(rg, std::move(v), Tail::power(-alpha, u[0])), alpha, 8.0 - 4.0 * alpha};
    return kf;
}

BlowupReport blowup_rescale(const RadialField& u, int samples) {
    BlowupReport br;
    br.u0 = u[0];
    br.r_k = 12.0 * std::exp(-br.u0);
    auto eta = [&](double x, double scale) { return u.at(br.r_k * x / scale) - br.u0 + std::log(2.0); };
    std::vector<double> xs;
    for (int i = 0; i < samples; ++i) xs.push_back(2.0 * i / (samples - 1));
    auto dev = [&](double scale) {
        double m = 0.0;
        for (double x : xs) m = std::max(m, std::abs(eta(x, scale) - model_profile(x)));
        return m;
    };
    br.deviation = dev(1.0);
    // shape fit over scale: eta(x / lambda)
    auto res = boost::math::tools::brent_find_minima([&](double ls) { return dev(std::exp(ls)); }, std::log(0.05),
                                                     std::log(20.0), 40);
    br.fit_scale = std::exp(res.first);
    br.fit_deviation = res.second;
    if (br.deviation < br.fit_deviation) {
        br.fit_scale = 1.0;
        br.fit_deviation = br.deviation;
    }
    // eta on |x| <= 4 at the unfitted scale
    for (int i = 0; i < samples; ++i) {
        double x = 4.0 * i / (samples - 1);
        br.x.push_back(x);
        br.eta_values.push_back(eta(x, 1.0));
    }
    std::vector<double> nodes(br.x);
    std::vector<double> vals(br.eta_values);
    br.eta = RadialField(std::make_shared<const RadialGrid>(std::move(nodes), "uniform[0,4]"), std::move(vals));
    return br;
}

BlowupReport blowup_rescale(const SolutionRecord& rec, int samples) { return blowup_rescale(rec.u, samples); }

LogLogFit loglog_coefficient(const RadialField& u, double p, double r_hi, double decades, int samples_per_decade) {
    if (r_hi <= 0.0) r_hi = u.grid().r_max();
    double lo = r_hi / std::pow(10.0, decades);
    if (lo <= std::exp(1.0)) throw domain_error("log log fit needs r > e");
    auto fit = [&](double a, double b) {
        std::vector<double> x, y;
        int n = std::max(4, static_cast<int>(samples_per_decade * std::log10(b / a)));
        for (int i = 0; i <= n; ++i) {
            double r = a * std::pow(b / a, static_cast<double>(i) / n);
            x.push_back(std::log(std::log(r)));
            y.push_back(u.at(r) + (1.0 + p / 4.0) * std::log(r));
        }
        return linear_fit(x, y);
    };
    LogLogFit lf;
    auto all = fit(lo, r_hi);
    lf.coefficient = all[0];
    lf.intercept = all[1];
    double a = lo;
    while (a < r_hi * (1 - 1e-12)) {
        double b = std::min(a * 10.0, r_hi);
        lf.per_decade.push_back(fit(a, b)[0]);
        a = b;
    }
    lf.drift = lf.per_decade.size() > 1 ? lf.per_decade.back() - lf.per_decade.front() : 0.0;
    return lf;
}

DiagnosticsReport diagnose(const SolutionRecord& rec, bool with_blowup, bool with_loglog) {
    DiagnosticsReport d;
    d.pohozaev = pohozaev_check(rec);
    d.slope = asymptotic_slope(rec.u);
    d.slope.target = -rec.Lambda / (8.0 * pi * pi);
    d.decay = decay_check(rec.u, rec.spec.profile.has_power_term() ? rec.spec.profile.p : 0.0);
    if (with_blowup) d.blowup = blowup_rescale(rec);
    if (with_loglog) d.loglog = loglog_coefficient(rec.u, rec.spec.profile.p);
    return d;
}

}  // namespace qcurv
