#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "qcurv/errors.hpp"
#include "qcurv/experiments.hpp"

using namespace qcurv;

TEST_CASE("tail round trip") {
    for (const Tail& t : {Tail::power(-1.7, 0.3), Tail::liouville(2.0, 1.5, 0.4, 6.0)}) {
        Tail b = tail_from_json(to_json(t));
        for (double r : {1e3, 1e4, 1e7}) CHECK(b.value(r) == t.value(r));
    }
}

TEST_CASE("field, profile and spec round trips") {
    GridParams gp;
    gp.nodes = 40;
    auto g = RadialGrid::make(gp);
    auto u = spherical_field(g, 1.0, 0.0);
    RadialField ut(g, u.values(), Tail::power(-2.0, std::log(2.0)));
    auto back = field_from_json(to_json(ut));
    REQUIRE(back.size() == ut.size());
    for (std::size_t i = 0; i < ut.size(); ++i) {
        CHECK(back[i] == ut[i]);
        CHECK(back.grid()[i] == (*g)[i]);
    }
    CHECK(back.has_tail());

    for (const auto& K : {CurvatureProfile::one_minus(3.0, 2.0), CurvatureProfile::one_plus(2.0, 0.1),
                          CurvatureProfile::constant(6.0), CurvatureProfile::regularized(0.3, 2.0, 1.0)}) {
        auto K2 = profile_from_json(to_json(K));
        CHECK(K2.kind == K.kind);
        for (double r : {0.0, 0.5, 2.0}) CHECK(K2(r) == K(r));
    }

    SolveSpec s;
    s.mode = SolveMode::prescribed_origin;
    s.target = 1.5;
    s.schedule = {0.5, 1.0};
    s.lambda_hint = 180.0;
    s.gauge = Gauge::origin;
    s.origin_fallback = false;
    auto s2 = solve_spec_from_json(to_json(s));
    CHECK(s2.mode == s.mode);
    CHECK(s2.target == s.target);
    CHECK(s2.schedule == s.schedule);
    CHECK(s2.lambda_hint == s.lambda_hint);
    CHECK(s2.gauge == s.gauge);
    CHECK(s2.origin_fallback == false);

    auto gp2 = grid_params_from_json(to_json(gp));
    CHECK(gp2.nodes == gp.nodes);
    CHECK(gp2.r_max == gp.r_max);
}

TEST_CASE("record round trip and csv") {
    GridParams gp;
    gp.nodes = 300;
    auto D = Discretization::build(gp);
    SolveSpec s;
    s.target = 140.0;
    auto rec = solve(s, *D);
    REQUIRE(rec.converged);
    auto j = to_json(rec);
    CHECK(j.contains("thresholds"));
    CHECK(j.at("window_check") == "inside");
    auto r2 = record_from_json(j);
    CHECK(r2.converged);
    CHECK(r2.Lambda == rec.Lambda);
    CHECK(r2.c == rec.c);
    for (std::size_t i = 0; i < rec.u.size(); ++i) CHECK(r2.u[i] == rec.u[i]);
    // stored records re-verify
    CHECK(pohozaev_check(r2).residual == doctest::Approx(pohozaev_check(rec).residual).epsilon(1e-12));

    std::string path = "io_test_field.csv";
    write_csv(rec.u, path);
    auto [r, v] = read_csv(path);
    REQUIRE(r.size() == rec.u.size());
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(v[i] == doctest::Approx(rec.u[i]).epsilon(1e-15));
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_json_file("definitely/not/here.json"), io_error);
}

TEST_CASE("experiment configuration") {
    for (auto k : {ExperimentKind::negative_window_sweep, ExperimentKind::positive_rho_sweep,
                   ExperimentKind::blowup_ramp, ExperimentKind::threshold_compactness,
                   ExperimentKind::kernel_validation, ExperimentKind::oracle_crosscheck,
                   ExperimentKind::nonexistence_probe, ExperimentKind::finite_curvature_probe}) {
        CHECK(experiment_kind_from_string(to_string(k)) == k);
        auto c = default_experiment(k);
        auto c2 = experiment_config_from_json(to_json(c));
        CHECK(config_hash(to_json(c)) == config_hash(to_json(c2)));
    }
    auto c = default_experiment(ExperimentKind::negative_window_sweep);
    CHECK(c.values == std::vector<double>{125.0, 140.0, 155.0});
    json j = {{"kind", "negative_window_sweep"}, {"values", {130.0}}, {"grid", {{"nodes", 500}}}};
    auto c3 = experiment_config_from_json(j);
    CHECK(c3.values == std::vector<double>{130.0});
    CHECK(c3.grid.nodes == 500);
    CHECK(c3.grid.r_max == GridParams{}.r_max);
    CHECK(config_hash(to_json(c3)) != config_hash(to_json(c)));
    CHECK(config_hash(to_json(c)).size() == 16);
    CHECK_THROWS(experiment_kind_from_string("nope"));
}

TEST_CASE("jsonl output") {
    auto c = default_experiment(ExperimentKind::finite_curvature_probe);
    c.samples = 3;
    auto res = run_experiment(c);
    std::string path = "io_test.jsonl";
    write_jsonl(res, c, path);
    std::ifstream is(path);
    std::string line;
    std::set<std::string> hashes;
    int n = 0;
    json last;
    while (std::getline(is, line)) {
        last = json::parse(line);
        hashes.insert(last.at("config_hash").get<std::string>());
        ++n;
    }
    CHECK(n == static_cast<int>(res.rows.size()) + 1);
    CHECK(hashes.size() == 1);
    CHECK(last.contains("config"));
    CHECK(last.at("kind") == "finite_curvature_probe");
    std::remove(path.c_str());
}

TEST_CASE("parallel_for") {
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    std::atomic<int> count{0};
    CHECK_THROWS_AS(parallel_for(50, 3,
                                 [&](std::size_t i) {
                                     ++count;
                                     if (i == 7) throw domain_error("boom");
                                 }),
                    domain_error);
    CHECK(thread_count(3) == 3);
    CHECK(thread_count() >= 1);
}
