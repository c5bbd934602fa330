#include <doctest.h>

#include <algorithm>

#include "aropf/errors.hpp"
#include "test_support.hpp"

using namespace aropf;
using Eigen::VectorXd;
using aropf::testing::bundled;
using aropf::testing::threebus_cost;

namespace {

struct Case {
    RadialGrid grid;
    GridMatrices m;
    ConditionReport cond;
    OpfSolution sol;
};

Case threebus_case() {
    Case c{bundled("threebus"), {}, {}, {}};
    const OperatingBounds bd = default_bounds(c.grid);
    c.m = build_matrices(c.grid, bd);
    c.cond = check_all(c.grid, c.m);
    c.sol = solve(build_ar_opf(c.grid, bd, threebus_cost(c.grid)));
    REQUIRE(c.sol.status == SolverStatus::Optimal);
    return c;
}

}  // namespace

TEST_CASE("longitudinal reactive flow") {
    const RadialGrid g = bundled("threebus");
    VectorXd Q(3), v(3);
    Q << 0.1, 0.2, 0.3;
    v << 0.9, 0.95, 1.0;
    const VectorXd Qc = longitudinal_q(g, Q, v);
    const double b = g.lines[0].b;
    CHECK(Qc[0] == doctest::Approx(0.1 + b * g.v0));
    CHECK(Qc[1] == doctest::Approx(0.2 + b * 0.9));
    CHECK(Qc[2] == doctest::Approx(0.3 + b * 0.95));
}

TEST_CASE("an exact input is a fixed point") {
    const Case c = threebus_case();
    // exact up to solver accuracy: start from the load flow on the same injections
    OpfVariables exact = inflate_losses(c.sol.vars, c.grid, c.m, VectorXd::Zero(3));
    const LoadFlowState lf = solve_loadflow(c.grid, exact.injections());
    for (int k = 0; k < 3; ++k) {
        exact.P[k] = lf.S_top[k].real();
        exact.Q[k] = lf.S_top[k].imag();
        exact.v[k] = lf.v[k];
        exact.f[k] = lf.f[k];
    }
    const RecoveryTrace tr = recover(exact, c.grid, c.m);
    REQUIRE(tr.converged);
    CHECK(tr.iterations() <= 2);
    CHECK(tr.delta_f_inf[0] <= 1e-12);
    CHECK((tr.recovered.f - exact.f).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((tr.recovered.v - exact.v).cwiseAbs().maxCoeff() <= 1e-12);
    const RecoveryCheck th = verify_recovery(tr, c.grid);
    CHECK(th.ok());
    CHECK_FALSE(th.had_strict);
    CHECK(check_recovery_envelope(tr, c.grid, c.m, c.cond.eta).ok());
}

TEST_CASE("3-bus optimum recovers inside the voltage sandwich") {
    const Case c = threebus_case();
    const RecoveryTrace tr = recover(c.sol.vars, c.grid, c.m);
    REQUIRE(tr.converged);
    const OpfVariables& in = c.sol.vars;
    const OpfVariables& out = tr.recovered;
    for (int k = 0; k < 3; ++k) {
        CHECK(c.grid.v_min <= in.v[k] + 1e-9);
        CHECK(in.v[k] <= out.v[k] + 1e-9);
        CHECK(out.v[k] <= in.v_bar[k] + 1e-12);
        CHECK(in.v_bar[k] <= c.grid.v_max + 1e-9);
    }
    const RecoveryCheck th = verify_recovery(tr, c.grid);
    CHECK(th.ok());
    CHECK(th.operational.empty());
}

TEST_CASE("inflated losses are recovered onto the load flow") {
    const Case c = threebus_case();
    for (int line = 0; line < 3; ++line) {
        CAPTURE(line);
        const OpfVariables in = inflate_losses(c.sol.vars, c.grid, c.m, 0.05 * VectorXd::Unit(3, line));
        CHECK(auxiliary_bound_violation(in) <= 1e-10);
        CHECK(matrix_form_residual(in, c.grid, c.m) <= 1e-10);
        const RecoveryTrace tr = recover(in, c.grid, c.m);
        REQUIRE(tr.converged);

        const LoadFlowState lf = solve_loadflow(c.grid, in.injections());
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(tr.recovered.P[k] - lf.S_top[k].real()) <= 1e-8);
            CHECK(std::abs(tr.recovered.Q[k] - lf.S_top[k].imag()) <= 1e-8);
            CHECK(std::abs(tr.recovered.v[k] - lf.v[k]) <= 1e-8);
            CHECK(std::abs(tr.recovered.f[k] - lf.f[k]) <= 1e-8);
        }
        // injections untouched, first step monotone, fixed point consistent
        CHECK(tr.recovered.p == in.p);
        CHECK(tr.recovered.q == in.q);
        CHECK((tr.iterates[1].f.array() <= tr.iterates[0].f.array() + 1e-15).all());
        const auto& last = tr.iterates.back();
        for (int k = 0; k < 3; ++k) {
            const int u = c.grid.up_index(k);
            const double vu = u < 0 ? c.grid.v0 : last.v[u];
            CHECK(last.f[k] == doctest::Approx((last.P[k] * last.P[k] + last.Qc[k] * last.Qc[k]) / vu).epsilon(1e-12));
        }
        CHECK(auxiliary_bound_violation(tr.recovered) <= 1e-10);

        const RecoveryCheck th = verify_recovery(tr, c.grid);
        CHECK(th.ok());
        CHECK(th.had_strict);
        CHECK(th.P1_recovered < th.P1_input - 1e-10);

        const EnvelopeReport env = check_recovery_envelope(tr, c.grid, c.m, c.cond.eta);
        CHECK(env.ok());
        // the extra loss lowers the voltages and opens a gap on line 1 as well
        CHECK(std::find(env.strict.begin(), env.strict.end(), line + 1) != env.strict.end());
        CHECK(std::find(env.strict.begin(), env.strict.end(), 1) != env.strict.end());
        CHECK(env.upstream == std::vector<int>{1});
        CHECK(env.checks > 0);
    }
}

TEST_CASE("the envelope names violated inequalities") {
    const Case c = threebus_case();
    const OpfVariables in = inflate_losses(c.sol.vars, c.grid, c.m, VectorXd::Constant(3, 0.05));
    RecoveryTrace tr = recover(in, c.grid, c.m);
    REQUIRE(tr.converged);
    REQUIRE(tr.iterations() >= 2);
    // tamper with the recorded second iterate
    tr.iterates[2].f[1] += 1.0;
    const EnvelopeReport env = check_recovery_envelope(tr, c.grid, c.m, c.cond.eta);
    REQUIRE_FALSE(env.ok());
    bool df = false;
    for (const auto& v : env.violations) df = df || (v.family == "df" && v.line == 2 && v.n == 2);
    CHECK(df);
}

TEST_CASE("rebuilt upper bounds are the tightest consistent ones") {
    const Case c = threebus_case();
    OpfVariables x = inflate_losses(c.sol.vars, c.grid, c.m, VectorXd::Constant(3, 0.02));
    const VectorXd fbar = x.f_bar;
    rebuild_upper_bounds(x, c.grid);
    CHECK((x.f_bar - fbar).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((x.f.array() <= x.f_bar.array() + 1e-12).all());
    CHECK((x.P.array() <= x.P_bar.array() + 1e-12).all());
    CHECK((x.Q.array() <= x.Q_bar.array() + 1e-12).all());
    CHECK_THROWS(inflate_losses(c.sol.vars, c.grid, c.m, VectorXd::Constant(3, -0.01)));
}

TEST_CASE("beyond the conditions recovery fails loudly or reports it") {
    // IEEE-34 with production at three times the load: C2 and C3 no longer hold
    const RadialGrid g = scale_injection(bundled("ieee34"), SweepRule::LoadShare, 3.0);
    const OperatingBounds bd = default_bounds(g, PmaxRule::LoadFlow);
    const GridMatrices m = build_matrices(g, bd);
    const ConditionReport cond = check_all(g, m);
    REQUIRE_FALSE(cond.holds);
    ArOpfOptions opts;
    opts.voltage_limits = false;
    const OpfSolution sol = solve(build_ar_opf(g, bd, CostModel::import_only(), opts));
    REQUIRE(sol.status == SolverStatus::Optimal);
    const OpfVariables in = inflate_losses(sol.vars, g, m, VectorXd::Constant(g.size(), 0.01));
    bool reported = false;
    try {
        const RecoveryTrace tr = recover(in, g, m);
        if (!tr.converged) reported = true;
        else {
            const RecoveryCheck th = verify_recovery(tr, g);
            reported = !th.ok() || !check_recovery_envelope(tr, g, m, std::min(cond.eta, 0.49)).ok();
        }
    } catch (const RecoveryError&) {
        reported = true;
    }
    CHECK(reported);
}
