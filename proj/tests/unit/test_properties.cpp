#include <doctest.h>

#include "test_support.hpp"

using namespace aropf;
using namespace aropf::testing;

TEST_CASE("random grids satisfy the structural identities") {
    RandomGrids gen(7);
    for (int i = 0; i < 30; ++i) {
        const RadialGrid g = gen.next();
        const GridMatrices m = build_matrices(g, default_bounds(g));
        const int L = g.size();
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(L, L);
        CHECK((m.H * (I - m.G)) == I);
        const Eigen::MatrixXd inc = m.G * g.b().asDiagonal() * m.G.transpose();
        CHECK((inc - Eigen::MatrixXd(m.B.asDiagonal()) + Eigen::MatrixXd(g.b().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK(((I - m.G.transpose() - m.M) * m.C - I).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(m.C.minCoeff() >= -1e-14);
        CHECK(m.D.minCoeff() >= -1e-14);
        CHECK(m.E.minCoeff() >= -1e-14);
        CHECK((m.theta - m.pi.cwiseProduct(m.pi) - m.rho.cwiseProduct(m.rho)).cwiseAbs().maxCoeff() <= 1e-15 * m.theta.maxCoeff());
    }
}

TEST_CASE("auxiliary sandwich, envelope and oracle agreement on random grids") {
    const PropertyStats st = run_property_set(20261019u, 50);
    CHECK(st.solves == 50);
    CHECK(st.sandwich_worst <= 1e-8);
    CHECK(st.converged == st.recoveries);
    INFO("first envelope violation: " << st.first_violation);
    CHECK(st.envelope_violations == 0);
    CHECK(st.envelope_checks > 0);
    CHECK(st.oracle_worst <= 1e-8);
    CHECK(st.strict_runs == st.recoveries);
    CHECK(st.p1_margin_min > 1e-10);
    for (const auto& f : st.failures) FAIL_CHECK(f);
}

TEST_CASE("matrix-form consistency at random optima") {
    RandomGrids gen(11);
    int done = 0;
    while (done < 15) {
        const RadialGrid g = gen.next(10);
        const OperatingBounds bd = default_bounds(g);
        const OpfSolution s = solve(build_ar_opf(g, bd, random_cost(gen.rng(), g)));
        if (s.status != SolverStatus::Optimal) continue;
        ++done;
        CHECK(matrix_form_residual(s.vars, g, build_matrices(g, bd)) <= 1e-8);
        CHECK((s.exactness_gap.array() >= -1e-8).all());
    }
}
