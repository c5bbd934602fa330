#pragma once

#include <string>

#include <Eigen/Dense>

#include "aropf/matrices.hpp"

namespace aropf {

struct ConditionReport {
    double c1_norm = 0.0;  // ||H^T M||_F
    double c2_norm = 0.0;  // ||E||_F
    double eta5 = 0.0;     // C3: D E <= eta5 D
    double eta1 = 0.0;     // C4: (H diag(r) E) o H <= eta1 H diag(r)
    double eta2 = 0.0;     // C5: H diag(r) E E <= eta2 H diag(r) E
    double eta = 0.0;      // max(eta1, eta2, eta5)
    bool holds = false;

    bool c1() const { return c1_norm < 1.0; }
    bool c2() const { return c2_norm < 1.0; }
    bool c3() const { return eta5 < 0.5; }
    bool c4() const { return eta1 < 0.5; }
    bool c5() const { return eta2 < 0.5; }
    // Name of the first failing condition in C1..C5 order, empty when all hold.
    std::string first_failure() const;
};

double check_c1(const Eigen::MatrixXd& H, const Eigen::MatrixXd& M);
double check_c2(const Eigen::MatrixXd& E);
// Smallest eta with lhs <= eta * rhs entry-wise. Entries with |rhs| <= 1e-12 max|rhs|
// are structural zeros; a matching lhs above that tolerance makes eta infinite.
double check_ratio_condition(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs);
ConditionReport check_all(const RadialGrid& grid, const GridMatrices& m);

// Builds the matrices and evaluates every condition; C1 failure yields a report
// with the remaining margins set to +inf instead of throwing.
ConditionReport evaluate_conditions(const RadialGrid& grid, const OperatingBounds& bounds);

}  // namespace aropf
