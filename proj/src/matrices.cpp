#include "aropf/matrices.hpp"

#include <complex>

#include "aropf/errors.hpp"
#include "aropf/loadflow.hpp"

namespace aropf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd build_B(const RadialGrid& grid) {
    VectorXd B = grid.b();
    for (int k = 0; k < grid.size(); ++k)
        if (int u = grid.up_index(k); u >= 0) B[u] += grid.lines[k].b;
    return B;
}

MatrixXd build_M(const RadialGrid& grid, const MatrixXd& H, const VectorXd& B) {
    return 2.0 * grid.x().asDiagonal() * H * B.asDiagonal();
}

MatrixXd build_C(const MatrixXd& M, const MatrixXd& G) {
    const auto L = G.rows();
    const MatrixXd H = closure(G);
    const double c1 = (H.transpose() * M).norm();
    if (!(c1 < 1.0))
        throw ConditionError("conditions not satisfied: ||H^T M|| = " + std::to_string(c1) + " >= 1", c1);
    MatrixXd A = MatrixXd::Identity(L, L) - G.transpose() - M;
    return A.partialPivLu().inverse();
}

MatrixXd build_D(const RadialGrid& grid, const MatrixXd& C, const MatrixXd& H) {
    const auto L = H.rows();
    const VectorXd r = grid.r(), x = grid.x();
    const MatrixXd HI = H - MatrixXd::Identity(L, L);
    MatrixXd inner = 2.0 * r.asDiagonal() * HI * r.asDiagonal();
    inner += 2.0 * x.asDiagonal() * HI * x.asDiagonal();
    inner.diagonal() += (r.array().square() + x.array().square()).matrix();
    return C * inner;
}

BoundVectors build_bound_vectors(const RadialGrid& grid, const OperatingBounds& bounds, const MatrixXd& H) {
    if (!(bounds.v_min > 0)) throw ValidationError("v_min must be > 0");
    const auto L = H.rows();
    const VectorXd b = grid.b();
    const MatrixXd G = adjacency(grid);
    const VectorXd vmax_vec = VectorXd::Constant(L, bounds.v_max);
    const VectorXd Hp = H * bounds.p_min;
    const VectorXd Hq = H * bounds.q_min - H * b.asDiagonal() * (MatrixXd::Identity(L, L) + G.transpose()) * vmax_vec;
    BoundVectors out;
    out.pi = bounds.P_max.cwiseMax(Hp.cwiseAbs()) / bounds.v_min;
    out.rho = (bounds.Q_max + b * bounds.v_max).cwiseMax(Hq.cwiseAbs()) / bounds.v_min;
    out.theta = (out.pi.array().square() + out.rho.array().square()).matrix();
    return out;
}

MatrixXd build_F(const RadialGrid& grid, const MatrixXd& H, const MatrixXd& D, const VectorXd& B) {
    return H * grid.x().asDiagonal() + H * B.asDiagonal() * D;
}

MatrixXd build_E(const RadialGrid& grid, const MatrixXd& H, const MatrixXd& F, const MatrixXd& D,
                 const BoundVectors& vec) {
    return 2.0 * vec.pi.asDiagonal() * H * grid.r().asDiagonal() + 2.0 * vec.rho.asDiagonal() * F +
           vec.theta.asDiagonal() * D;
}

GridMatrices build_matrices(const RadialGrid& grid, const OperatingBounds& bounds) {
    GridMatrices m;
    m.G = adjacency(grid);
    m.H = closure(m.G);
    m.B = build_B(grid);
    m.M = build_M(grid, m.H, m.B);
    m.C = build_C(m.M, m.G);
    m.D = build_D(grid, m.C, m.H);
    BoundVectors vec = build_bound_vectors(grid, bounds, m.H);
    m.pi = vec.pi;
    m.rho = vec.rho;
    m.theta = vec.theta;
    m.F = build_F(grid, m.H, m.D, m.B);
    m.E = build_E(grid, m.H, m.F, m.D, vec);
    return m;
}

VectorXd auxiliary_voltage(const RadialGrid& grid, const GridMatrices& m, const VectorXd& p, const VectorXd& q) {
    return grid.v0 * m.C.col(0) - 2.0 * m.C * grid.r().asDiagonal() * (m.H * p) -
           2.0 * m.C * grid.x().asDiagonal() * (m.H * q);
}

OperatingBounds default_bounds(const RadialGrid& grid, PmaxRule rule, double pmax_floor) {
    const int L = grid.size();
    OperatingBounds ob;
    ob.v_min = grid.v_min;
    ob.v_max = grid.v_max;
    ob.p_min.resize(L);
    ob.q_min.resize(L);
    VectorXd p_hi(L), q_hi(L);
    for (int k = 0; k < L; ++k) {
        ob.p_min[k] = grid.buses[k].p_min;
        ob.q_min[k] = grid.buses[k].q_min;
        p_hi[k] = grid.buses[k].p_max;
        q_hi[k] = grid.buses[k].q_max;
    }
    if (rule == PmaxRule::Pct110) {
        const MatrixXd H = closure(adjacency(grid));
        ob.P_max = 1.1 * H * p_hi.cwiseMax(0.0);
        ob.Q_max = 1.1 * H * q_hi.cwiseMax(0.0);
    } else {
        std::vector<std::complex<double>> s_hi(L), s_lo(L);
        for (int k = 0; k < L; ++k) {
            s_hi[k] = {p_hi[k], q_hi[k]};
            s_lo[k] = {ob.p_min[k], ob.q_min[k]};
        }
        LoadFlowState hi = solve_loadflow(grid, s_hi);
        LoadFlowState lo = solve_loadflow(grid, s_lo);
        ob.P_max.resize(L);
        ob.Q_max.resize(L);
        for (int k = 0; k < L; ++k) {
            ob.P_max[k] = 1.1 * std::max(hi.S_top[k].real(), lo.S_top[k].real());
            ob.Q_max[k] = 1.1 * std::max(hi.S_top[k].imag(), lo.S_top[k].imag());
        }
    }
    ob.P_max = ob.P_max.cwiseMax(pmax_floor);
    ob.Q_max = ob.Q_max.cwiseMax(pmax_floor);
    return ob;
}

}  // namespace aropf
