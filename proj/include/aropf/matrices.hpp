#pragma once

#include <Eigen/Dense>

#include "aropf/network.hpp"

namespace aropf {

struct OperatingBounds {
    Eigen::VectorXd P_max, Q_max;  // per line
    Eigen::VectorXd p_min, q_min;  // per bus
    double v_min = 0.0, v_max = 0.0;
};

enum class PmaxRule { Pct110, LoadFlow };

// Flow limits from the grid's bus bounds. Pct110: 110% of the maximum downstream
// consumption. LoadFlow: 110% of the top flows of the exact load flow at maximum
// consumption and at maximum injection, whichever is larger. Both are floored at pmax_floor.
OperatingBounds default_bounds(const RadialGrid& grid, PmaxRule rule = PmaxRule::Pct110, double pmax_floor = 1e-4);

struct BoundVectors {
    Eigen::VectorXd pi, rho, theta;
};

struct GridMatrices {
    Eigen::MatrixXd G, H;
    Eigen::VectorXd B;
    Eigen::MatrixXd M, C, D, F, E;
    Eigen::VectorXd pi, rho, theta;
};

Eigen::VectorXd build_B(const RadialGrid& grid);
Eigen::MatrixXd build_M(const RadialGrid& grid, const Eigen::MatrixXd& H, const Eigen::VectorXd& B);
// Throws ConditionError when ||H^T M||_F >= 1.
Eigen::MatrixXd build_C(const Eigen::MatrixXd& M, const Eigen::MatrixXd& G);
Eigen::MatrixXd build_D(const RadialGrid& grid, const Eigen::MatrixXd& C, const Eigen::MatrixXd& H);
BoundVectors build_bound_vectors(const RadialGrid& grid, const OperatingBounds& bounds, const Eigen::MatrixXd& H);
Eigen::MatrixXd build_F(const RadialGrid& grid, const Eigen::MatrixXd& H, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& B);
Eigen::MatrixXd build_E(const RadialGrid& grid, const Eigen::MatrixXd& H, const Eigen::MatrixXd& F,
                        const Eigen::MatrixXd& D, const BoundVectors& vec);

GridMatrices build_matrices(const RadialGrid& grid, const OperatingBounds& bounds);

// Lossless auxiliary voltages v_bar = v0 C e1 - 2 C diag(r) H p - 2 C diag(x) H q.
Eigen::VectorXd auxiliary_voltage(const RadialGrid& grid, const GridMatrices& m, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& q);

}  // namespace aropf
