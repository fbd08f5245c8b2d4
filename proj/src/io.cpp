#include "qcurv/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "qcurv/errors.hpp"

namespace qcurv {

namespace {

// JSON has no NaN
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double get_num(const json& j, const char* key, double dflt) {
    if (!j.contains(key) || j.at(key).is_null()) return dflt;
    return j.at(key).get<double>();
}

}  // namespace

json to_json(const Tail& t) {
    json j;
    j["kind"] = t.kind == Tail::Kind::power ? "power" : "liouville";
    j["sigma"] = num(t.asymptotic_slope());
    j["C"] = num(t.asymptotic_offset());
    if (t.kind == Tail::Kind::liouville) {
        j["p"] = t.p;
        j["mu"] = t.mu;
        j["delta"] = t.delta;
        j["t0"] = t.t0;
    }
    return j;
}

Tail tail_from_json(const json& j) {
    std::string k = j.at("kind").get<std::string>();
    if (k == "power") return Tail::power(j.at("sigma").get<double>(), j.at("C").get<double>());
    if (k == "liouville")
        return Tail::liouville(j.at("p").get<double>(), j.at("mu").get<double>(), j.at("delta").get<double>(),
                               j.at("t0").get<double>());
    throw io_error("unknown tail kind '" + k + "'");
}

json to_json(const RadialField& u) {
    json j;
    j["r"] = u.grid().nodes();
    j["value"] = u.values();
    j["grid"] = u.grid().descriptor();
    j["tail"] = u.has_tail() ? to_json(*u.tail()) : json(nullptr);
    return j;
}

RadialField field_from_json(const json& j) {
    auto r = j.at("r").get<std::vector<double>>();
    auto v = j.at("value").get<std::vector<double>>();
    std::string desc = j.value("grid", std::string("loaded"));
    std::optional<Tail> t;
    if (j.contains("tail") && !j.at("tail").is_null()) t = tail_from_json(j.at("tail"));
    return RadialField(std::make_shared<const RadialGrid>(std::move(r), desc), std::move(v), t);
}

void write_csv(const RadialField& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path);
    os << "r,value\n";
    for (std::size_t i = 0; i < u.size(); ++i) os << fmt::format("{:.17g},{:.17g}\n", u.grid()[i], u[i]);
}

std::pair<std::vector<double>, std::vector<double>> read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open " + path);
    std::string line;
    std::getline(is, line);
    if (line != "r,value") throw io_error("unexpected CSV header in " + path);
    std::vector<double> r, v;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw io_error("malformed CSV line: " + line);
        r.push_back(std::strtod(line.c_str(), nullptr));
        v.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    return {r, v};
}

json to_json(const CurvatureProfile& K) {
    return {{"kind", to_string(K.kind)}, {"p", K.p},         {"K0", K.K0},
            {"lambda", K.lambda},        {"eps", K.eps},     {"mu", K.mu}};
}

CurvatureProfile profile_from_json(const json& j) {
    CurvatureProfile K;
    K.kind = profile_kind_from_string(j.value("kind", std::string("one_minus_rp")));
    K.p = j.value("p", K.p);
    K.K0 = j.value("K0", K.K0);
    K.lambda = j.value("lambda", K.lambda);
    K.eps = j.value("eps", K.eps);
    K.mu = j.value("mu", K.mu);
    K.validate();
    return K;
}

json to_json(const GridParams& g) {
    return {{"r_max", g.r_max}, {"r_min", g.r_min}, {"nodes", g.nodes}, {"patch", g.patch}};
}

GridParams grid_params_from_json(const json& j) {
    GridParams g;
    g.r_max = j.value("r_max", g.r_max);
    g.r_min = j.value("r_min", g.r_min);
    g.nodes = j.value("nodes", g.nodes);
    g.patch = j.value("patch", g.patch);
    return g;
}

json to_json(const SolveSpec& s) {
    json j;
    j["profile"] = to_json(s.profile);
    j["mode"] = s.mode == SolveMode::prescribed_lambda ? "prescribed_lambda" : "prescribed_origin";
    j["target"] = s.target;
    j["damping"] = s.damping;
    j["theta_min"] = s.theta_min;
    j["newton_tol"] = s.newton_tol;
    j["max_iter"] = s.max_iter;
    j["max_outer"] = s.max_outer;
    j["tail"] = to_string(s.tail);
    j["gauge"] = s.gauge ? json(to_string(*s.gauge)) : json(nullptr);
    j["expect_failure"] = s.expect_failure;
    j["lambda_hint"] = s.lambda_hint ? json(*s.lambda_hint) : json(nullptr);
    j["origin_fallback"] = s.origin_fallback;
    j["schedule"] = s.schedule;
    return j;
}

SolveSpec solve_spec_from_json(const json& j) {
    SolveSpec s;
    if (j.contains("profile")) s.profile = profile_from_json(j.at("profile"));
    std::string mode = j.value("mode", std::string("prescribed_lambda"));
    if (mode == "prescribed_lambda")
        s.mode = SolveMode::prescribed_lambda;
    else if (mode == "prescribed_origin")
        s.mode = SolveMode::prescribed_origin;
    else
        throw io_error("unknown solve mode '" + mode + "'");
    s.target = j.value("target", s.target);
    s.damping = j.value("damping", s.damping);
    s.theta_min = j.value("theta_min", s.theta_min);
    s.newton_tol = j.value("newton_tol", s.newton_tol);
    s.max_iter = j.value("max_iter", s.max_iter);
    s.max_outer = j.value("max_outer", s.max_outer);
    s.tail = tail_model_from_string(j.value("tail", std::string("auto")));
    if (j.contains("gauge") && !j.at("gauge").is_null()) s.gauge = gauge_from_string(j.at("gauge").get<std::string>());
    s.expect_failure = j.value("expect_failure", false);
    if (j.contains("lambda_hint") && !j.at("lambda_hint").is_null()) s.lambda_hint = j.at("lambda_hint").get<double>();
    s.origin_fallback = j.value("origin_fallback", true);
    if (j.contains("schedule")) s.schedule = j.at("schedule").get<std::vector<double>>();
    return s;
}

json to_json(const Thresholds& t) {
    return {{"p", t.p}, {"sph", t.sph}, {"star", t.star}, {"two_star", t.two_star}, {"p_quarter_sph", t.p_quarter_sph}};
}

json to_json(const SolutionRecord& rec, bool with_field) {
    json j;
    j["spec"] = to_json(rec.spec);
    j["converged"] = rec.converged;
    j["expect_failure"] = rec.expect_failure;
    j["window_check"] = rec.window_check;
    j["Lambda"] = num(rec.Lambda);
    j["c"] = num(rec.c);
    j["u0"] = rec.u.size() ? num(rec.u[0]) : json(nullptr);
    j["V0"] = num(rec.V0);
    j["Vp"] = num(rec.Vp);
    j["lap0"] = num(rec.lap0);
    j["lambda_tail"] = num(rec.lambda_tail);
    j["iterations"] = rec.iterations;
    j["outer_iterations"] = rec.outer_iterations;
    j["residual_norm"] = num(rec.residual_norm);
    j["gauge"] = rec.gauge;
    j["tail_model"] = rec.tail_model;
    j["branch"] = rec.branch;
    j["message"] = rec.message;
    if (rec.spec.profile.kind != ProfileKind::constant) j["thresholds"] = to_json(thresholds_for(rec.spec.profile.p));
    json h = json::array();
    for (const auto& it : rec.history)
        h.push_back({{"outer", it.outer}, {"iter", it.iter}, {"residual", num(it.residual)}, {"theta", it.theta},
                     {"u0", num(it.u0)}});
    j["history"] = h;
    if (with_field && rec.u.size()) j["field"] = to_json(rec.u);
    return j;
}

SolutionRecord record_from_json(const json& j) {
    SolutionRecord rec;
    rec.spec = solve_spec_from_json(j.at("spec"));
    rec.converged = j.value("converged", false);
    rec.expect_failure = j.value("expect_failure", false);
    rec.window_check = j.value("window_check", std::string());
    rec.Lambda = get_num(j, "Lambda", NAN);
    rec.c = get_num(j, "c", NAN);
    rec.V0 = get_num(j, "V0", NAN);
    rec.Vp = get_num(j, "Vp", NAN);
    rec.lap0 = get_num(j, "lap0", NAN);
    rec.lambda_tail = get_num(j, "lambda_tail", NAN);
    rec.iterations = j.value("iterations", 0);
    rec.outer_iterations = j.value("outer_iterations", 0);
    rec.residual_norm = get_num(j, "residual_norm", NAN);
    rec.gauge = j.value("gauge", std::string());
    rec.tail_model = j.value("tail_model", std::string());
    rec.branch = j.value("branch", std::string());
    rec.message = j.value("message", std::string());
    if (!j.contains("field")) throw io_error("record has no embedded field");
    rec.u = field_from_json(j.at("field"));
    return rec;
}

json to_json(const PohozaevReport& p) {
    return {{"lhs", num(p.lhs)},           {"rhs", num(p.rhs)},          {"residual", num(p.residual)},
            {"decay_ok", p.decay_ok},      {"applicable", p.applicable}};
}

json to_json(const SlopeFit& s) {
    double rel = s.target != 0.0 ? std::abs(s.sigma - s.target) / std::abs(s.target) : NAN;
    return {{"sigma", num(s.sigma)}, {"target", num(s.target)}, {"relative_error", num(rel)}, {"rms", num(s.rms)}};
}

json to_json(const BlowupReport& b) {
    return {{"u0", num(b.u0)},           {"r_k", num(b.r_k)},       {"deviation", num(b.deviation)},
            {"fit_scale", num(b.fit_scale)}, {"fit_deviation", num(b.fit_deviation)}};
}

json to_json(const LogLogFit& l) {
    return {{"coefficient", num(l.coefficient)}, {"intercept", num(l.intercept)}, {"drift", num(l.drift)},
            {"per_decade", l.per_decade}};
}

json to_json(const DecayCheck& d) {
    json s = json::array();
    for (auto [r, v] : d.samples) s.push_back({num(r), num(v)});
    return {{"decreasing", d.decreasing}, {"samples", s}};
}

json to_json(const DiagnosticsReport& d) {
    json j;
    j["pohozaev"] = to_json(d.pohozaev);
    j["slope"] = to_json(d.slope);
    j["decay"] = {{"decreasing", d.decay.decreasing}};
    if (d.loglog) j["loglog"] = to_json(*d.loglog);
    if (d.blowup) j["blowup"] = to_json(*d.blowup);
    return j;
}

json to_json(const ShootState& s, bool with_trajectory) {
    json j;
    j["a"] = s.a;
    j["b"] = s.b;
    j["r_start"] = s.r_start;
    j["r_exit"] = s.r_exit;
    j["class"] = to_string(s.terminal);
    j["diagnostics"] = s.diagnostics;
    if (!s.trajectory.empty()) j["Lambda_partial_end"] = num(s.trajectory.back().Lambda);
    if (with_trajectory) {
        json t = json::array();
        for (const auto& x : s.trajectory) t.push_back({num(x.r), num(x.u), num(x.du), num(x.w), num(x.dw)});
        j["trajectory"] = t;
    }
    return j;
}

void write_trajectory_csv(const ShootState& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path);
    os << "r,u,du,w,dw\n";
    for (const auto& x : s.trajectory)
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", x.r, x.u, x.du, x.w, x.dw);
}

json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw io_error(fmt::format("{}: {}", path, e.what()));
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path);
    os << j.dump(2) << "\n";
}

}  // namespace qcurv
