#include <doctest.h>

#include <limits>

#include "test_support.hpp"

using namespace aropf;
using Eigen::MatrixXd;
using aropf::testing::bundled;
using aropf::testing::make_grid;

TEST_CASE("ratio condition") {
    MatrixXd rhs(2, 2);
    rhs << 1, 2, 0, 4;
    CHECK(check_ratio_condition(MatrixXd::Zero(2, 2), rhs) == 0.0);
    CHECK(check_ratio_condition(rhs, rhs) == 1.0);
    MatrixXd lhs(2, 2);
    lhs << 0.1, 0.4, 0, 1;
    CHECK(check_ratio_condition(lhs, rhs) == doctest::Approx(0.25));
    // lhs where rhs is a structural zero
    lhs(1, 0) = 1e-3;
    CHECK(check_ratio_condition(lhs, rhs) == std::numeric_limits<double>::infinity());
    // floating noise on both sides stays a structural zero
    lhs(1, 0) = 1e-17;
    rhs(1, 0) = 1e-17;
    CHECK(check_ratio_condition(lhs, rhs) == doctest::Approx(0.25));
}

TEST_CASE("C1 vanishes without shunts and scales with the square of length") {
    RadialGrid g = make_grid({0, 1, 2}, 0.01, 0.02, 0.0);
    const MatrixXd H = closure(adjacency(g));
    CHECK(check_c1(H, build_M(g, H, build_B(g))) == 0.0);

    const RadialGrid t = bundled("threebus");
    const auto c1 = [](const RadialGrid& x) {
        const MatrixXd Hx = closure(adjacency(x));
        return check_c1(Hx, build_M(x, Hx, build_B(x)));
    };
    const double base = c1(t);
    CHECK(base < 1e-3);
    CHECK(c1(scale_lengths(t, 2.0)) == doctest::Approx(4 * base).epsilon(1e-12));
    CHECK(c1(scale_lengths(t, 4.0)) == doctest::Approx(16 * base).epsilon(1e-12));
}

TEST_CASE("C2 in the zero-impedance limit") {
    RadialGrid g = make_grid({0, 1, 1}, 1e-9, 1e-9, 1e-9);
    for (auto& b : g.buses) b.p_max = b.q_max = 0.1;
    CHECK(check_c2(build_matrices(g, default_bounds(g)).E) < 1e-6);
}

TEST_CASE("conditions hold at base load on every bundled grid") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const ConditionReport r = evaluate_conditions(g, default_bounds(g, pmax_rule_of(g)));
        CHECK(r.holds);
        CHECK(r.eta < 0.5);
        CHECK(r.c2_norm < 1.0);
        CHECK(r.first_failure().empty());
    }
}

TEST_CASE("report consistency") {
    const RadialGrid g = bundled("ieee34");
    const GridMatrices m = build_matrices(g, default_bounds(g));
    const ConditionReport r = check_all(g, m);
    CHECK(r.eta == std::max({r.eta1, r.eta2, r.eta5}));
    CHECK(r.holds == (r.c1() && r.c2() && r.c3() && r.c4() && r.c5()));
    CHECK(r.c1_norm == (m.H.transpose() * m.M).norm());
    CHECK(r.c2_norm == m.E.norm());
    const ConditionReport again = check_all(g, m);
    CHECK(again.eta5 == r.eta5);
    CHECK(again.c2_norm == r.c2_norm);
}

TEST_CASE("norm conditions grow with line length") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        double c1 = 0.0, c2 = 0.0;
        for (double k : {1.0, 2.0, 4.0}) {
            const RadialGrid s = scale_lengths(g, k);
            const GridMatrices m = build_matrices(s, default_bounds(g));
            const double n1 = check_c1(m.H, m.M), n2 = check_c2(m.E);
            CHECK(n1 >= c1);
            CHECK(n2 >= c2);
            c1 = n1;
            c2 = n2;
        }
    }
}

TEST_CASE("IEEE-34 loses C3 first under growing production") {
    const RadialGrid g = bundled("ieee34");
    const ConditionReport below = evaluate_conditions(scale_injection(g, SweepRule::LoadShare, 2.3),
                                                      default_bounds(scale_injection(g, SweepRule::LoadShare, 2.3)));
    CHECK(below.holds);
    const RadialGrid hi = scale_injection(g, SweepRule::LoadShare, 2.45);
    const ConditionReport r = evaluate_conditions(hi, default_bounds(hi));
    CHECK_FALSE(r.holds);
    CHECK_FALSE(r.c3());
    CHECK(r.c1());
    CHECK(r.c2());
}
