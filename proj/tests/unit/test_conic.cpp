#include <doctest.h>

#include <cmath>

#include "aropf/conic.hpp"

using namespace aropf;
using Eigen::VectorXd;

TEST_CASE("affine expressions") {
    LinExpr a = LinExpr::var(0, 2.0) + LinExpr::var(1) + 3.0;
    LinExpr b = a - LinExpr::var(0, 2.0);
    VectorXd x(2);
    x << 5, 7;
    CHECK(a.eval(x) == 20.0);
    CHECK(b.eval(x) == 10.0);
    const LinExpr c = b.compressed();
    CHECK(c.terms.size() == 1);
    CHECK((-2.0 * c).eval(x) == -20.0);
}

TEST_CASE("linear program") {
    ConicProgram p;
    const int x = p.add_var("x"), y = p.add_var("y");
    p.add_range(LinExpr::var(x), 0, 4, "box");
    p.add_range(LinExpr::var(y), 0, 3, "box");
    p.add_le(LinExpr::var(x) + LinExpr::var(y) - 5.0, "sum");
    p.add_objective(-1.0 * LinExpr::var(x) - 2.0 * LinExpr::var(y));
    const SolveResult r = default_backend().solve(p, {});
    REQUIRE(r.status == SolverStatus::Optimal);
    CHECK(r.x[x] == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(r.x[y] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(r.objective == doctest::Approx(-8.0).epsilon(1e-7));
    CHECK(p.count_rows("box") == 4);
    CHECK(p.max_violation(r.x) <= 1e-8);
}

TEST_CASE("second-order cones") {
    SUBCASE("plain") {
        // minimise t with t >= |(x - 3, y + 4)|
        ConicProgram p;
        const int t = p.add_var("t"), x = p.add_var("x"), y = p.add_var("y");
        p.add_soc(LinExpr::var(t), {LinExpr::var(x) - 3.0, LinExpr::var(y) + 4.0}, "soc");
        p.add_eq(LinExpr::var(x), "fix");
        p.add_eq(LinExpr::var(y), "fix");
        p.add_objective(LinExpr::var(t));
        const SolveResult r = default_backend().solve(p, {});
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(r.x[t] == doctest::Approx(5.0).epsilon(1e-7));
    }
    SUBCASE("rotated") {
        // minimise u with u * 2 >= 3^2
        ConicProgram p;
        const int u = p.add_var("u"), w = p.add_var("w");
        p.add_rotated_cone(LinExpr::var(u), LinExpr::var(w), {LinExpr(3.0)}, "rsoc");
        p.add_eq(LinExpr::var(w) - 2.0, "fix");
        p.add_objective(LinExpr::var(u));
        const SolveResult r = default_backend().solve(p, {});
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(r.x[u] == doctest::Approx(4.5).epsilon(1e-7));
        CHECK(p.count_cones("rsoc") == 1);
        CHECK(p.cones()[0].margin(r.x) >= -1e-7);
    }
    SUBCASE("quadratic objective") {
        ConicProgram p;
        const int x = p.add_var("x");
        p.add_quadratic_objective(LinExpr::var(x) - 1.5, 2.0, "q");
        const SolveResult r = default_backend().solve(p, {});
        REQUIRE(r.status == SolverStatus::Optimal);
        CHECK(r.x[x] == doctest::Approx(1.5).epsilon(1e-6));
    }
}

TEST_CASE("infeasible and unbounded programs report a status") {
    ConicProgram inf;
    const int x = inf.add_var("x");
    CHECK_THROWS(inf.add_range(LinExpr::var(x), 2, 1, "empty"));
    inf.add_ge(LinExpr::var(x) - 2.0, "low");
    inf.add_le(LinExpr::var(x) - 1.0, "high");
    CHECK(default_backend().solve(inf, {}).status == SolverStatus::Infeasible);

    ConicProgram unb;
    const int y = unb.add_var("y");
    unb.add_le(LinExpr::var(y) - 1.0, "upper");
    unb.add_objective(LinExpr::var(y));
    CHECK(default_backend().solve(unb, {}).status == SolverStatus::Unbounded);
}

TEST_CASE("CBF export") {
    ConicProgram p;
    const int u = p.add_var("u"), w = p.add_var("w"), t = p.add_var("t");
    p.add_rotated_cone(LinExpr::var(u), LinExpr::var(w), {LinExpr::var(t)}, "rsoc");
    p.add_eq(LinExpr::var(t) - 1.0, "fix");
    p.add_objective(LinExpr::var(u) + LinExpr::var(w));
    const std::string cbf = p.to_cbf();
    CHECK(cbf.find("VER") != std::string::npos);
    CHECK(cbf.find("VAR") != std::string::npos);
    CHECK(cbf.find("OBJACOORD") != std::string::npos);
}
