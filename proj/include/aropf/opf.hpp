#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aropf/conic.hpp"
#include "aropf/loadflow.hpp"
#include "aropf/matrices.hpp"
#include "aropf/network.hpp"

namespace aropf {

struct BusCost {
    double lin_p = 0.0, lin_q = 0.0;
    double quad_p = 0.0, quad_q = 0.0;  // >= 0
};

struct CostModel {
    double import_slope = 1.0;  // strictly positive
    double import_offset = 0.0;
    std::vector<BusCost> bus;   // per bus 1..L; empty means no bus costs

    static CostModel import_only(double slope = 1.0) {
        CostModel c;
        c.import_slope = slope;
        return c;
    }
};

// Cost file: top-level import_slope / import_offset, then [bus label] sections with
// lin_p, lin_q, quad_p, quad_q. Labels are the grid's external bus labels.
CostModel parse_cost(std::string_view text, const RadialGrid& grid);

struct OpfVariables {
    Eigen::VectorXd p, q;        // bus injections (absorption positive)
    Eigen::VectorXd P, Q, v, f;  // top flows, squared voltage, squared series current
    // Auxiliary system; empty for the plain relaxation.
    Eigen::VectorXd P_hat, Q_hat, v_bar, f_bar, P_bar, Q_bar;

    bool has_aux() const { return v_bar.size() > 0; }
    std::vector<cplx> injections() const;
};

enum class OpfModel { ArOpf, ROpf };
std::string to_string(OpfModel m);

struct ArOpfOptions {
    bool voltage_limits = true;   // v >= v_min and v_bar <= v_max
    bool ampacity_limits = true;  // conservative terminal-current cones
    bool aux_technical = true;    // P <= P_bar <= P_max, Q <= Q_bar <= Q_max
};

struct OpfProblem {
    OpfModel model = OpfModel::ArOpf;
    RadialGrid grid;  // the grid the program was built on
    ConicProgram program;

    // Variable indices per line / bus (0-based position k for label k+1).
    std::vector<int> p, q, P, Q, v, f;
    std::vector<int> P_hat, Q_hat, v_bar, f_bar, P_bar, Q_bar;
};

OpfProblem build_ar_opf(const RadialGrid& grid, const OperatingBounds& bounds, const CostModel& cost,
                        const ArOpfOptions& opts = {});
OpfProblem build_r_opf(const RadialGrid& grid, const CostModel& cost);

struct OpfSolution {
    OpfModel model = OpfModel::ArOpf;
    SolverStatus status = SolverStatus::NumericalFailure;
    double objective = 0.0;
    OpfVariables vars;
    Eigen::VectorXd exactness_gap;
    double primal_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
    double seconds = 0.0;
    std::string message;
};

OpfSolution solve(const OpfProblem& problem, const ConicBackend& backend = default_backend(),
                  const SolverSettings& settings = {});

// f_l - (P_l^2 + (Q_l + v_up b_l)^2) / v_up per line.
Eigen::VectorXd exactness_gap(const OpfVariables& vars, const RadialGrid& grid);
constexpr double kGapThreshold = 1e-6;
// Labels (1..L) of lines whose gap exceeds the threshold.
std::vector<int> strict_lines(const Eigen::VectorXd& gap, double threshold = kGapThreshold);

// Largest violation of f <= f_bar, v <= v_bar, P_hat <= P <= P_bar, Q_hat <= Q <= Q_bar.
double auxiliary_bound_violation(const OpfVariables& vars);
// Largest residual of the matrix-form identities for the auxiliary system:
// P_hat = H p, Q_hat = H q - H diag(b)(I + G^T) v_bar, P = P_hat + H diag(r) f, v = v_bar - D f.
double matrix_form_residual(const OpfVariables& vars, const RadialGrid& grid, const GridMatrices& m);

// Constraint check of the original problem for fixed injections: exact load flow,
// voltage and ampacity limits, injection bounds.
struct OriginalFeasibility {
    bool loadflow_converged = false;
    LoadFlowState state;
    std::vector<Violation> operational;
    std::vector<std::string> injection;
    bool feasible() const { return loadflow_converged && operational.empty() && injection.empty(); }
};
OriginalFeasibility check_original(const RadialGrid& grid, const std::vector<cplx>& s, double tol = 1e-8);

}  // namespace aropf
