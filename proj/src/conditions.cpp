#include "aropf/conditions.hpp"

#include <algorithm>
#include <limits>

#include "aropf/errors.hpp"

namespace aropf {

using Eigen::MatrixXd;

std::string ConditionReport::first_failure() const {
    if (!c1()) return "C1";
    if (!c2()) return "C2";
    if (!c3()) return "C3";
    if (!c4()) return "C4";
    if (!c5()) return "C5";
    return "";
}

double check_c1(const MatrixXd& H, const MatrixXd& M) { return (H.transpose() * M).norm(); }

double check_c2(const MatrixXd& E) { return E.norm(); }

double check_ratio_condition(const MatrixXd& lhs, const MatrixXd& rhs) {
    const double scale = rhs.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale;
    double eta = 0.0;
    for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
        for (Eigen::Index j = 0; j < lhs.cols(); ++j) {
            if (std::abs(rhs(i, j)) <= tol) {
                if (lhs(i, j) > tol) return std::numeric_limits<double>::infinity();
            } else {
                eta = std::max(eta, lhs(i, j) / rhs(i, j));
            }
        }
    }
    return eta;
}

ConditionReport check_all(const RadialGrid& grid, const GridMatrices& m) {
    ConditionReport rep;
    rep.c1_norm = check_c1(m.H, m.M);
    rep.c2_norm = check_c2(m.E);
    const MatrixXd HR = m.H * grid.r().asDiagonal();
    const MatrixXd HRE = HR * m.E;
    rep.eta5 = check_ratio_condition(m.D * m.E, m.D);
    rep.eta1 = check_ratio_condition(HRE.cwiseProduct(m.H), HR);
    rep.eta2 = check_ratio_condition(HRE * m.E, HRE);
    rep.eta = std::max({rep.eta1, rep.eta2, rep.eta5});
    rep.holds = rep.c1() && rep.c2() && rep.c3() && rep.c4() && rep.c5();
    return rep;
}

ConditionReport evaluate_conditions(const RadialGrid& grid, const OperatingBounds& bounds) {
    try {
        return check_all(grid, build_matrices(grid, bounds));
    } catch (const ConditionError& e) {
        ConditionReport rep;
        const double inf = std::numeric_limits<double>::infinity();
        rep.c1_norm = e.norm();
        rep.c2_norm = rep.eta5 = rep.eta1 = rep.eta2 = rep.eta = inf;
        rep.holds = false;
        return rep;
    }
}

}  // namespace aropf
