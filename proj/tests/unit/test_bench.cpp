#include <doctest.h>

#include <sstream>

#include "test_support.hpp"

using namespace aropf;
using aropf::testing::bundled;

TEST_CASE("injection scaling rules") {
    const RadialGrid g = bundled("cigre_mv");
    const RadialGrid ls = scale_injection(g, SweepRule::LoadShare, 2.0);
    const RadialGrid cap = scale_injection(g, SweepRule::Capability, 2.0);
    double load = 0.0, dg = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        const Bus& b = g.buses[k];
        CHECK(ls.buses[k].p_min == doctest::Approx(-b.p_max));
        CHECK(cap.buses[k].p_min == doctest::Approx(b.p_max - 2.0 * (b.p_max - b.p_min)));
        CHECK(ls.buses[k].q_min == b.q_min);
        load += b.p_max;
        dg += b.p_max - b.p_min;
    }
    const double S = g.base.s_base / 1e6;
    CHECK(sweep_axis_mw(g, SweepRule::LoadShare, 2.0) == doctest::Approx(load * S));
    CHECK(sweep_axis_mw(g, SweepRule::Capability, 2.0) == doctest::Approx(2.0 * dg * S));
    CHECK(dg * S == doctest::Approx(3.079));
    CHECK(sweep_rule_of(g) == SweepRule::Capability);
    CHECK(sweep_rule_of(bundled("ieee34")) == SweepRule::LoadShare);
    CHECK_THROWS(parse_sweep_rule("linear"));
}

TEST_CASE("fixed injections") {
    const RadialGrid g = bundled("threebus");
    const std::vector<cplx> s = {cplx(0.1, 0.2), cplx(0.3, 0.0), cplx(-0.1, 0.0)};
    const RadialGrid f = fix_injection(g, s);
    for (int k = 0; k < 3; ++k) {
        CHECK(f.buses[k].p_min == s[k].real());
        CHECK(f.buses[k].p_max == s[k].real());
        CHECK(f.buses[k].q_min == s[k].imag());
    }
    CHECK(min_injection(g)[2] == cplx(-0.3, 0.0));
}

TEST_CASE("sweep points are reproducible one by one") {
    const RadialGrid g = bundled("ieee34");
    SweepSettings st = sweep_settings_of(g);
    st.grid_points = 13;
    const SweepResult res = sweep_conditions(g, SweepRule::LoadShare, st);
    REQUIRE(res.points.size() >= 13);
    CHECK(res.points.front().k == 0.0);
    CHECK(res.points.front().report.holds);
    for (std::size_t i = 1; i < res.points.size(); ++i) CHECK(res.points[i].k > res.points[i - 1].k);
    for (const SweepPoint& p : res.points) {
        const RadialGrid s = scale_injection(g, SweepRule::LoadShare, p.k);
        ConditionReport r;
        try {
            r = evaluate_conditions(s, default_bounds(s, st.pmax));
        } catch (const std::exception&) {
            continue;
        }
        CHECK(r.eta5 == p.report.eta5);
        CHECK(r.c2_norm == p.report.c2_norm);
        CHECK(r.holds == p.report.holds);
    }
    REQUIRE(res.violated);
    CHECK(res.first_failing.k - res.last_holding.k <= st.rel_width * (st.k_hi - st.k_lo) + 1e-15);
    CHECK(res.last_holding.report.holds);
    CHECK_FALSE(res.first_failing.report.holds);
}

TEST_CASE("3-bus comparison datasets") {
    const RadialGrid g = bundled("threebus");
    const ThreeBusComparison cmp = run_threebus_comparison(g, aropf::testing::threebus_cost(g));
    CHECK(cmp.aropf.status == SolverStatus::Optimal);
    CHECK(cmp.aropf.recovered);
    CHECK(cmp.aropf.limit_a == doctest::Approx(120.0));
    CHECK(cmp.aropf.rows.size() == 3);
    CHECK(cmp.ropf.max_current_a() > 120.0);
    std::ostringstream csv;
    write_threebus_csv(csv, cmp);
    const std::string text = csv.str();
    CHECK(text.rfind("model,line,label,end,position_km,current_a,limit_a\n", 0) == 0);
    // three models, three lines, two ends
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 18);
}

TEST_CASE("compression gaps are non-negative") {
    for (const char* name : {"ieee34", "cigre_mv"}) {
        for (CompressionMode mode : {CompressionMode::Voltage, CompressionMode::Ampacity}) {
            CAPTURE(name);
            CAPTURE(to_string(mode));
            const RadialGrid g = bundled(name);
            const CompressionResult r = quantify_compression(g, mode, sweep_rule_of(g), compression_settings_of(g));
            CHECK(r.binding);
            for (const CompressionRow& row : r.rows) CHECK(row.gap >= -1e-9);
            CHECK(r.gap() >= 0);
            std::ostringstream csv;
            write_compression_csv(csv, r);
            CHECK(csv.str().rfind("mode,id,label,end,auxiliary_pu,original_pu,gap_pu,binding\n", 0) == 0);
        }
    }
}
