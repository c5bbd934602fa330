#include <doctest.h>

#include "aropf/errors.hpp"
#include "test_support.hpp"

using namespace aropf;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using aropf::testing::bundled;
using aropf::testing::make_grid;

namespace {

// C as the truncated series (I + H^T M + (H^T M)^2 + ...) H^T.
MatrixXd neumann_c(const MatrixXd& H, const MatrixXd& M, int terms) {
    const MatrixXd A = H.transpose() * M;
    MatrixXd term = MatrixXd::Identity(H.rows(), H.cols()), sum = term;
    for (int n = 1; n < terms; ++n) {
        term = term * A;
        sum += term;
    }
    return sum * H.transpose();
}

GridMatrices of(const RadialGrid& g) { return build_matrices(g, default_bounds(g)); }

// Flow equations with f held fixed are linear in (P, Q, v); solve them densely.
VectorXd linear_voltages(const RadialGrid& g, const VectorXd& f) {
    const int L = g.size();
    MatrixXd A = MatrixXd::Zero(3 * L, 3 * L);
    VectorXd rhs = VectorXd::Zero(3 * L);
    const auto P = [](int k) { return k; };
    const auto Q = [L](int k) { return L + k; };
    const auto V = [L](int k) { return 2 * L + k; };
    for (int k = 0; k < L; ++k) {
        const Line& ln = g.lines[k];
        const int u = g.up_index(k);
        A(P(k), P(k)) = 1;
        A(Q(k), Q(k)) = 1;
        for (int c = 0; c < L; ++c)
            if (g.up_index(c) == k) {
                A(P(k), P(c)) -= 1;
                A(Q(k), Q(c)) -= 1;
            }
        rhs[P(k)] = ln.r * f[k];
        // Q_top = Q_bot + x f - (v_up + v) b
        A(Q(k), V(k)) += ln.b;
        rhs[Q(k)] = ln.x * f[k];
        // v = v_up - 2 (r P + x (Q + v_up b)) + |z|^2 f
        A(V(k), V(k)) = 1;
        A(V(k), P(k)) = 2 * ln.r;
        A(V(k), Q(k)) = 2 * ln.x;
        rhs[V(k)] = (ln.r * ln.r + ln.x * ln.x) * f[k];
        if (u < 0) {
            rhs[Q(k)] -= g.v0 * ln.b;
            rhs[V(k)] += g.v0 - 2 * ln.x * g.v0 * ln.b;
        } else {
            A(Q(k), V(u)) += ln.b;
            A(V(k), V(u)) += -1 + 2 * ln.x * ln.b;
        }
    }
    return A.lu().solve(rhs).tail(L);
}

}  // namespace

TEST_CASE("B counts the per-end susceptances at each bus") {
    const RadialGrid g = make_grid({0, 1, 2}, 0.01, 0.01, 0.003);
    const VectorXd B = build_B(g);
    CHECK(B[0] == doctest::Approx(0.006));
    CHECK(B[1] == doctest::Approx(0.006));
    CHECK(B[2] == doctest::Approx(0.003));
    const RadialGrid star = make_grid({0, 1, 1, 2}, 0.01, 0.01, 0.002);
    const VectorXd Bs = build_B(star);
    CHECK(Bs[0] == doctest::Approx(0.006));
    CHECK(Bs[2] == doctest::Approx(0.002));
    CHECK(Bs[3] == doctest::Approx(0.002));
}

TEST_CASE("shunt incidence identity on every bundled grid") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const MatrixXd G = adjacency(g);
        const VectorXd b = g.b(), B = build_B(g);
        const MatrixXd lhs = G * b.asDiagonal() * G.transpose();
        const MatrixXd rhs = MatrixXd(B.asDiagonal()) - MatrixXd(b.asDiagonal());
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("M on the 3-bus cable grid") {
    const RadialGrid g = bundled("threebus");
    const GridMatrices m = of(g);
    // element formula M(i, j) = 2 x_i H(i, j) B_j
    const double x = 0.0009627306078644873, b = 0.004674765266765298;
    const double Bv[3] = {2 * b, 2 * b, b};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(m.M(i, j) == doctest::Approx(j >= i ? 2 * x * Bv[j] : 0.0).epsilon(1e-12));
    CHECK(m.M(0, 0) == doctest::Approx(1.8002158427586992e-05).epsilon(1e-12));
}

TEST_CASE("single line closed forms") {
    RadialGrid g = make_grid({0}, 0.02, 0.05, 0.01);
    g.buses[0].p_max = 0.5;
    g.buses[0].q_max = 0.2;
    const GridMatrices m = of(g);
    CHECK(m.M(0, 0) == doctest::Approx(2 * 0.05 * 0.01));
    CHECK(m.C(0, 0) == doctest::Approx(1.0 / (1.0 - 2 * 0.05 * 0.01)));

    const RadialGrid g0 = make_grid({0}, 0.02, 0.05, 0.0);
    const MatrixXd H = closure(adjacency(g0));
    const MatrixXd C = build_C(build_M(g0, H, build_B(g0)), adjacency(g0));
    CHECK(C(0, 0) == 1.0);
    CHECK(build_D(g0, C, H)(0, 0) == doctest::Approx(0.02 * 0.02 + 0.05 * 0.05));
}

TEST_CASE("shunt-free collapse") {
    RadialGrid g = make_grid({0, 1, 1, 3, 3}, 0.0, 0.0, 0.0);
    for (int k = 0; k < g.size(); ++k) {
        g.lines[k].r = 0.01 * (k + 1);
        g.lines[k].x = 0.013 * (k + 2);
        g.buses[k].p_max = 0.05;
        g.buses[k].q_max = 0.02;
    }
    const GridMatrices m = of(g);
    const int L = g.size();
    const MatrixXd I = MatrixXd::Identity(L, L);
    CHECK(m.M.isZero());
    CHECK(m.C == m.H.transpose());
    CHECK((m.F - m.H * g.x().asDiagonal()).cwiseAbs().maxCoeff() <= 1e-15);
    const VectorXd r = g.r(), x = g.x();
    const MatrixXd inner = 2 * r.asDiagonal() * ((m.H - I) * r.asDiagonal()) +
                           2 * x.asDiagonal() * ((m.H - I) * x.asDiagonal()) +
                           MatrixXd((r.array().square() + x.array().square()).matrix().asDiagonal());
    CHECK((m.D - m.H.transpose() * inner).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("C against its inverse and the Neumann series on every bundled grid") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const GridMatrices m = of(g);
        const int L = g.size();
        const MatrixXd I = MatrixXd::Identity(L, L);
        CHECK(((I - m.G.transpose() - m.M) * m.C - I).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(m.C.minCoeff() >= -1e-14);
        const double a = (m.H.transpose() * m.M).norm();
        // tail of the series after 20 terms: a^20 / (1 - a) ||H^T||
        const double tail = std::pow(a, 20) / (1 - a) * m.H.norm();
        CHECK((neumann_c(m.H, m.M, 20) - m.C).norm() <= tail + 1e-14 * m.C.norm());  // plus rounding
    }
    const GridMatrices t = of(bundled("threebus"));
    CHECK((neumann_c(t.H, t.M, 20) - t.C).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("C refuses grids violating C1") {
    const RadialGrid g = make_grid({0, 1}, 0.01, 2.0, 0.5);
    const MatrixXd G = adjacency(g), H = closure(G);
    const MatrixXd M = build_M(g, H, build_B(g));
    CHECK((H.transpose() * M).norm() >= 1.0);
    try {
        build_C(M, G);
        FAIL("no error");
    } catch (const ConditionError& e) {
        CHECK(e.norm() == doctest::Approx((H.transpose() * M).norm()));
    }
}

TEST_CASE("D is the voltage response to series losses") {
    for (const char* name : {"threebus", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const GridMatrices m = of(g);
        const int L = g.size();
        const VectorXd v0 = linear_voltages(g, VectorXd::Zero(L));
        for (int j = 0; j < L; ++j) {
            const VectorXd dv = linear_voltages(g, VectorXd::Unit(L, j)) - v0;
            CHECK((dv + m.D.col(j)).cwiseAbs().maxCoeff() <= 1e-10 * m.D.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("bound vectors") {
    RadialGrid g = make_grid({0, 1, 1}, 0.01, 0.01, 0.0);
    OperatingBounds bd;
    bd.P_max = VectorXd::Constant(3, 0.4);
    bd.Q_max = VectorXd::Constant(3, 0.2);
    bd.p_min = VectorXd::Zero(3);
    bd.q_min = VectorXd::Zero(3);
    bd.v_min = 0.81;
    bd.v_max = 1.21;
    const BoundVectors bv = build_bound_vectors(g, bd, closure(adjacency(g)));
    for (int k = 0; k < 3; ++k) {
        CHECK(bv.pi[k] == doctest::Approx(0.4 / 0.81));
        CHECK(bv.rho[k] == doctest::Approx(0.2 / 0.81));
        CHECK(bv.theta[k] == bv.pi[k] * bv.pi[k] + bv.rho[k] * bv.rho[k]);
    }
    bd.v_min = 0.0;
    CHECK_THROWS(build_bound_vectors(g, bd, closure(adjacency(g))));
}

TEST_CASE("IEEE-34 bound vectors under the 110 % rule") {
    const RadialGrid g = bundled("ieee34");
    const OperatingBounds bd = default_bounds(g, PmaxRule::Pct110);
    const GridMatrices m = build_matrices(g, bd);
    // independent evaluation of the defining maxima
    const VectorXd Hp = m.H * bd.p_min;
    const VectorXd vmax = VectorXd::Constant(g.size(), g.v_max);
    const VectorXd b = g.b();
    const VectorXd Hq = m.H * bd.q_min - m.H * b.asDiagonal() * ((MatrixXd::Identity(g.size(), g.size()) + m.G.transpose()) * vmax);
    for (int k = 0; k < g.size(); ++k) {
        CAPTURE(k);
        CHECK(m.pi[k] == doctest::Approx(std::max(bd.P_max[k], std::abs(Hp[k])) / g.v_min).epsilon(1e-13));
        CHECK(m.rho[k] == doctest::Approx(std::max(bd.Q_max[k] + b[k] * g.v_max, std::abs(Hq[k])) / g.v_min).epsilon(1e-13));
        CHECK(m.theta[k] == m.pi[k] * m.pi[k] + m.rho[k] * m.rho[k]);
    }
    // 110 % of downstream load: line 1 carries the whole feeder
    double total = 0.0;
    for (const Bus& bus : g.buses) total += std::max(bus.p_max, 0.0);
    CHECK(bd.P_max[0] == doctest::Approx(1.1 * total));
}

TEST_CASE("non-negativity and length monotonicity of the derived matrices") {
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        CAPTURE(name);
        const RadialGrid g = bundled(name);
        const GridMatrices m = of(g);
        CHECK(m.D.minCoeff() >= -1e-14);
        CHECK(m.E.minCoeff() >= -1e-14);
        CHECK(m.F.minCoeff() >= -1e-14);
        CHECK(m.pi.minCoeff() >= 0);
        CHECK(m.rho.minCoeff() >= 0);
        const GridMatrices m2 = build_matrices(scale_lengths(g, 2.0), default_bounds(g));
        CHECK((m2.E.array() >= m.E.array()).all());
        CHECK(((m2.E - m.E).array() > 0 || m.E.array() == 0).all());
    }
}

TEST_CASE("E norm on the 3-bus grid") {
    const GridMatrices m = of(bundled("threebus"));
    // frozen from an independent evaluation of the defining products
    const MatrixXd E2 = 2 * m.pi.asDiagonal() * m.H * bundled("threebus").r().asDiagonal() + 2 * m.rho.asDiagonal() * m.F +
                        m.theta.asDiagonal() * m.D;
    CHECK((E2 - m.E).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(m.E.norm() == doctest::Approx(0.00720676).epsilon(1e-5));
}
