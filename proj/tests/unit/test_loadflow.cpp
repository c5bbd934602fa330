#include <doctest.h>

#include "aropf/errors.hpp"
#include "aropf/solution_io.hpp"
#include "test_support.hpp"

using namespace aropf;
using aropf::testing::bundled;
using aropf::testing::make_grid;

namespace {
std::vector<cplx> zeros(int L) { return std::vector<cplx>(L, cplx(0, 0)); }
}  // namespace

TEST_CASE("no load without shunts is flat") {
    const RadialGrid g = make_grid({0, 1, 1, 2}, 0.01, 0.02, 0.0);
    const LoadFlowState st = solve_loadflow(g, zeros(4));
    for (int k = 0; k < 4; ++k) {
        CHECK(st.v[k] == g.v0);
        CHECK(st.f[k] == 0.0);
        CHECK(std::abs(st.S_top[k]) == 0.0);
    }
    const TerminalCurrents tc = terminal_currents(st, g);
    for (int k = 0; k < 4; ++k) {
        CHECK(tc.top_sq[k] == 0.0);
        CHECK(tc.bottom_sq[k] == 0.0);
    }
}

TEST_CASE("no load with shunts lifts the voltage") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const LoadFlowState st = solve_loadflow(g, zeros(g.size()));
        CHECK(st.residual <= 1e-10);
        CHECK(flow_residual(g, zeros(g.size()), st.S_top, st.v, st.f) <= 1e-10);
        for (int k = 0; k < g.size(); ++k) {
            CHECK(st.v[k] >= g.v0 - 1e-15);
            if (!g.lines[k].shunt_free || k > 0) CHECK(st.f[k] > 0);
        }
    }
}

TEST_CASE("residual and loss sanity under load") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        std::vector<cplx> s;
        double net = 0.0;
        for (const Bus& b : g.buses) {
            s.emplace_back(b.p_max, b.q_max);
            net += b.p_max;
        }
        const LoadFlowState st = solve_loadflow(g, s);
        CHECK(flow_residual(g, s, st.S_top, st.v, st.f) <= 1e-10);
        CHECK(st.S_top[0].real() >= net);
        for (double f : st.f) CHECK(f >= 0);
    }
}

TEST_CASE("terminal currents equal f only without shunts") {
    RadialGrid g = make_grid({0, 1}, 0.02, 0.03, 0.0);
    const std::vector<cplx> s = {cplx(0.2, 0.1), cplx(0.1, -0.05)};
    const LoadFlowState st = solve_loadflow(g, s);
    const TerminalCurrents tc = terminal_currents(st, g);
    for (int k = 0; k < 2; ++k) CHECK(tc.top_sq[k] == doctest::Approx(st.f[k]).epsilon(1e-12));

    g.lines[0].b = g.lines[1].b = 0.01;
    const LoadFlowState sh = solve_loadflow(g, s);
    const TerminalCurrents ts = terminal_currents(sh, g);
    CHECK(std::abs(ts.top_sq[0] - sh.f[0]) > 1e-6);
}

TEST_CASE("operational limits are closed") {
    RadialGrid g = make_grid({0}, 0.01, 0.01, 0.0);
    LoadFlowState st;
    st.v = {g.v_max};
    st.S_top = {cplx(0, 0)};
    st.S_bot = {cplx(0, 0)};
    st.f = {0.0};
    CHECK(check_operational(st, g).empty());
    st.v = {g.v_max + 1e-6};
    REQUIRE(check_operational(st, g).size() == 1);
    CHECK(check_operational(st, g)[0].kind == Violation::Kind::OverVoltage);
    st.v = {1.0};
    st.S_bot = {cplx(2.5, 0.0)};
    st.S_top = {cplx(2.5, 0.0)};
    const auto viol = check_operational(st, g);
    CHECK(viol.size() == 2);
}

TEST_CASE("collapse and non-convergence are reported") {
    const RadialGrid g = make_grid({0, 1}, 0.05, 0.05, 0.0);
    const std::vector<cplx> s = {cplx(5.0, 5.0), cplx(5.0, 5.0)};
    CHECK_THROWS_AS(solve_loadflow(g, s), LoadFlowError);
}

TEST_CASE("R-OPF optimum of the 3-bus case overloads a cable") {
    const RadialGrid g = bundled("threebus");
    const OpfSolution sol = solve(build_r_opf(g, aropf::testing::threebus_cost(g)));
    REQUIRE(sol.status == SolverStatus::Optimal);
    const LoadFlowState st = solve_loadflow(g, sol.vars.injections());
    bool ampacity = false;
    for (const Violation& v : check_operational(st, g))
        ampacity = ampacity || v.kind == Violation::Kind::AmpacityTop || v.kind == Violation::Kind::AmpacityBottom;
    CHECK(ampacity);
}

TEST_CASE("injection files") {
    const RadialGrid g = bundled("threebus");
    const auto s = parse_injections("[bus 1]\np = 0.1\nq = 0.02\n[bus 3]\np = -0.2\n", g);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == cplx(0.1, 0.02));
    CHECK(s[1] == cplx(0, 0));
    CHECK(s[2] == cplx(-0.2, 0));
    CHECK_THROWS(parse_injections("[bus 1]\np = 0.1\n[bus 1]\np = 0.2\n", g));
    CHECK_THROWS(parse_injections("[bus 9]\np = 0.1\n", g));
}
