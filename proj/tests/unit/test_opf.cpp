#include <doctest.h>

#include "aropf/errors.hpp"
#include "aropf/solution_io.hpp"
#include "test_support.hpp"

using namespace aropf;
using Eigen::VectorXd;
using aropf::testing::bundled;
using aropf::testing::make_grid;
using aropf::testing::threebus_cost;

namespace {

OpfSolution solve_threebus_ar() {
    const RadialGrid g = bundled("threebus");
    return solve(build_ar_opf(g, default_bounds(g), threebus_cost(g)));
}

}  // namespace

TEST_CASE("3-bus AR-OPF program structure") {
    const RadialGrid g = bundled("threebus");
    const OpfProblem p = build_ar_opf(g, default_bounds(g), threebus_cost(g));
    CHECK(p.program.count_cones("relaxation-cone") == 3);
    CHECK(p.program.count_cones("aux-top-cone") == 3);
    CHECK(p.program.count_cones("aux-bottom-cone") == 3);
    CHECK(p.program.count_cones("ampacity-top") == 3);
    CHECK(p.program.count_cones("ampacity-bottom") == 3);
    CHECK(p.program.count_rows("aux-technical") > 0);
    // objective 50 p3 + 150 P1
    const LinExpr obj = p.program.objective().compressed();
    bool p3 = false, P1 = false;
    for (const auto& [j, a] : obj.terms) {
        if (j == p.p[2]) p3 = a == 50.0;
        if (j == p.P[0]) P1 = a == 150.0;
    }
    CHECK(p3);
    CHECK(P1);
}

TEST_CASE("single line cone count") {
    RadialGrid g = make_grid({0}, 0.01, 0.02, 0.001);
    g.buses[0].p_max = 0.1;
    const OpfProblem p = build_ar_opf(g, default_bounds(g), CostModel::import_only());
    CHECK(p.program.count_cones("relaxation-cone") == 1);
    CHECK(p.program.count_cones("aux-top-cone") + p.program.count_cones("aux-bottom-cone") == 2);
    CHECK(p.program.count_cones("ampacity-top") + p.program.count_cones("ampacity-bottom") == 2);
    CHECK(p.program.count_cones() == 5);
}

TEST_CASE("3-bus AR-OPF is exact") {
    const OpfSolution s = solve_threebus_ar();
    REQUIRE(s.status == SolverStatus::Optimal);
    CHECK(s.exactness_gap.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(s.primal_residual <= 1e-8);
    CHECK(auxiliary_bound_violation(s.vars) <= 1e-8);
    const RadialGrid g = bundled("threebus");
    CHECK(matrix_form_residual(s.vars, g, build_matrices(g, default_bounds(g))) <= 1e-8);
    // fixed injections at buses 1 and 2
    CHECK(s.vars.p[0] == doctest::Approx(-0.21).epsilon(1e-9));
    CHECK(s.vars.q[1] == doctest::Approx(-0.1134).epsilon(1e-9));
    CHECK(std::abs(s.vars.q[2]) <= 1e-9);
}

TEST_CASE("3-bus R-OPF leaves a strict relaxation gap") {
    const RadialGrid g = bundled("threebus");
    const OpfSolution s = solve(build_r_opf(g, threebus_cost(g)));
    REQUIRE(s.status == SolverStatus::Optimal);
    CHECK_FALSE(strict_lines(s.exactness_gap).empty());
    CHECK_FALSE(s.vars.has_aux());
}

TEST_CASE("exactness gap of a hand-built point") {
    const RadialGrid g = bundled("threebus");
    const LoadFlowState st = solve_loadflow(g, {cplx(0.1, 0.02), cplx(0.05, 0.01), cplx(0.02, 0)});
    OpfVariables x;
    x.P.resize(3);
    x.Q.resize(3);
    x.v.resize(3);
    x.f.resize(3);
    for (int k = 0; k < 3; ++k) {
        x.P[k] = st.S_top[k].real();
        x.Q[k] = st.S_top[k].imag();
        x.v[k] = st.v[k];
        x.f[k] = st.f[k];
    }
    x.f[1] += 0.1;
    const VectorXd gap = exactness_gap(x, g);
    CHECK(gap[1] == doctest::Approx(0.1).epsilon(1e-11));
    CHECK(std::abs(gap[0]) <= 1e-12);
    CHECK(std::abs(gap[2]) <= 1e-12);
    CHECK(strict_lines(gap) == std::vector<int>{2});
}

TEST_CASE("inconsistent limits give an infeasible status") {
    const RadialGrid g = bundled("threebus");
    OperatingBounds bd = default_bounds(g);
    bd.v_min = 1.3;
    bd.v_max = 1.2;
    const OpfSolution s = solve(build_ar_opf(g, bd, CostModel::import_only()));
    CHECK(s.status == SolverStatus::Infeasible);
    RadialGrid bad = g;
    bad.buses[2].p_min = 1.0;
    CHECK_THROWS(build_ar_opf(bad, default_bounds(g), CostModel::import_only()));
}

TEST_CASE("benchmark grids at base load") {
    const RadialGrid cig = bundled("cigre_mv");
    const OpfSolution c = solve(build_ar_opf(cig, default_bounds(cig, pmax_rule_of(cig)), CostModel::import_only()));
    REQUIRE(c.status == SolverStatus::Optimal);
    CHECK(auxiliary_bound_violation(c.vars) <= 1e-8);

    // Without its regulators the IEEE-34 feeder sags to 0.854 p.u. at base load, below
    // the 0.95 p.u. floor, and its losses exceed the 10 % margin of the load rule. The
    // program builds, the solver proves infeasibility, and with load-flow flow caps and
    // no voltage rows it solves.
    const RadialGrid ieee = bundled("ieee34");
    const OpfProblem p = build_ar_opf(ieee, default_bounds(ieee), CostModel::import_only());
    CHECK(p.program.count_cones("relaxation-cone") == 31);
    CHECK(solve(p).status == SolverStatus::Infeasible);
    ArOpfOptions opts;
    opts.voltage_limits = false;
    const OperatingBounds bd = default_bounds(ieee, PmaxRule::LoadFlow);
    const OpfSolution s = solve(build_ar_opf(ieee, bd, CostModel::import_only(), opts));
    REQUIRE(s.status == SolverStatus::Optimal);
    CHECK(auxiliary_bound_violation(s.vars) <= 1e-8);
    CHECK(s.exactness_gap.maxCoeff() <= 1e-6);
}

TEST_CASE("higher import price never raises the import") {
    const RadialGrid g = bundled("threebus");
    CostModel c = threebus_cost(g);
    const OpfSolution lo = solve(build_ar_opf(g, default_bounds(g), c));
    c.import_slope = 40.0;
    const OpfSolution cheap = solve(build_ar_opf(g, default_bounds(g), c));
    REQUIRE(lo.status == SolverStatus::Optimal);
    REQUIRE(cheap.status == SolverStatus::Optimal);
    CHECK(lo.vars.P[0] <= cheap.vars.P[0] + 1e-9);
}

TEST_CASE("power-factor injection sets") {
    RadialGrid g = make_grid({0, 1}, 0.01, 0.02, 0.001);
    g.buses[0].p_min = 0.05;
    g.buses[0].p_max = 0.2;
    g.buses[0].q_min = -1;
    g.buses[0].q_max = 1;
    g.buses[0].injection.kind = InjectionSet::Kind::FixedPowerFactor;
    g.buses[0].injection.rho = 0.8;
    g.buses[1].p_min = -0.2;
    g.buses[1].p_max = -0.01;
    g.buses[1].q_min = -1;
    g.buses[1].q_max = 1;
    g.buses[1].injection.kind = InjectionSet::Kind::MinPowerFactor;
    g.buses[1].injection.rho = 0.9;
    CostModel c = CostModel::import_only();
    c.bus.resize(2);
    c.bus[1].lin_q = 1.0;  // pushes q2 to its lower end
    OperatingBounds bd = default_bounds(g);
    bd.P_max.setConstant(1.0);
    bd.Q_max.setConstant(1.0);
    const OpfSolution s = solve(build_ar_opf(g, bd, c));
    REQUIRE(s.status == SolverStatus::Optimal);
    CHECK(s.vars.q[0] == doctest::Approx(0.75 * s.vars.p[0]).epsilon(1e-7));
    const double t = std::sqrt(1 - 0.81) / 0.9;
    CHECK(std::abs(s.vars.q[1]) <= t * std::abs(s.vars.p[1]) + 1e-8);
    g.buses[1].p_max = 0.1;  // range of both signs
    CHECK_THROWS(build_ar_opf(g, bd, c));
}

TEST_CASE("cost files") {
    const RadialGrid g = bundled("threebus");
    const CostModel c = threebus_cost(g);
    CHECK(c.import_slope == 150.0);
    REQUIRE(c.bus.size() == 3);
    CHECK(c.bus[2].lin_p == 50.0);
    CHECK_THROWS_AS(parse_cost("import_slope = 0\n", g), ValidationError);
    CHECK_THROWS(parse_cost("import_slope = 1\n[bus 1]\nquad_p = -1\n", g));
}

TEST_CASE("solution files round-trip") {
    const RadialGrid g = bundled("threebus");
    const OpfSolution s = solve_threebus_ar();
    REQUIRE(s.status == SolverStatus::Optimal);
    const SolutionFile out{"aropf", "optimal", s.objective, s.vars};
    const SolutionFile in = parse_solution(format_solution(out, g), g);
    CHECK(in.model == "aropf");
    CHECK(in.objective == s.objective);
    CHECK(in.vars.f == s.vars.f);
    CHECK(in.vars.v_bar == s.vars.v_bar);
    CHECK(in.vars.Q_bar == s.vars.Q_bar);
    CHECK_THROWS(parse_solution("model = x\n[bus 1]\np = 1\n", g));
}
