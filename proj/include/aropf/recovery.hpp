#pragma once

// Fixed-point recovery of a load-flow solution from a relaxed AR-OPF point, and the
// envelope checks that come with its convergence argument.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aropf/conditions.hpp"
#include "aropf/loadflow.hpp"
#include "aropf/matrices.hpp"
#include "aropf/opf.hpp"

namespace aropf {

struct RecoveryOptions {
    double tol = 1e-12;  // on ||f(n) - f(n-1)||_inf
    int max_iter = 200;
    int divergence_window = 10;  // consecutive growth steps before giving up
};

struct RecoveryIterate {
    Eigen::VectorXd f, P, Qc, v;
};

struct RecoveryTrace {
    std::vector<RecoveryIterate> iterates;  // n = 0..N
    std::vector<double> delta_f_inf;        // entry n-1 holds ||df(n)||_inf
    std::vector<double> delta_f_two;        // same with the 2-norm
    bool converged = false;

    // Fixed inputs of the map: P_hat = H p, Qc_hat = H q - H diag(B) v_bar, v_bar lossless.
    Eigen::VectorXd P_hat, Qc_hat, v_bar;

    // Relaxed point the trace started from, and the recovered one (valid when converged).
    OpfVariables input;
    OpfVariables recovered;

    int iterations() const { return static_cast<int>(iterates.size()) - 1; }
};

// Q^c_l = Q_l + b_l v_up(l), with v_up of the first line equal to v0.
Eigen::VectorXd longitudinal_q(const RadialGrid& grid, const Eigen::VectorXd& Q, const Eigen::VectorXd& v);

// Runs the map from the relaxed point. Throws RecoveryError on divergence or when a
// voltage iterate drops to zero; hitting max_iter returns a trace with converged = false.
RecoveryTrace recover(const OpfVariables& relaxed, const RadialGrid& grid, const GridMatrices& m,
                      const RecoveryOptions& opts = {});

// Smallest f_bar >= f (and the matching P_bar, Q_bar) satisfying the two bound cones and
// the upper flow equations at the given point, built from the leaves upward. Fills
// f_bar, P_bar, Q_bar of vars; P_hat, Q_hat, v_bar must be set.
void rebuild_upper_bounds(OpfVariables& vars, const RadialGrid& grid);

// Relaxed point with the series losses of the given lines raised by delta, kept
// consistent with P = P_hat + H diag(r) f, Q^c = Qc_hat + F f, v = v_bar - D f and
// with rebuilt upper bounds. Lines whose cone the larger flows would break get just
// enough extra f to stay on it. Used to generate inputs where the relaxation is not tight.
OpfVariables inflate_losses(const OpfVariables& vars, const RadialGrid& grid, const GridMatrices& m,
                            const Eigen::VectorXd& delta);

struct EnvelopeViolation {
    int n = 0;
    std::string family;  // "df", "dv", "v-lower", "dP-upstream", "P-upstream", "f-bar", "P-bar", "Qc-bar", "norm"
    int line = 0;        // label, 0 for norm checks
    double lhs = 0.0, rhs = 0.0;
};

struct EnvelopeReport {
    std::vector<int> strict;    // lines with strict inequality in the relaxation cone
    std::vector<int> upstream;  // lines upstream of every strict line
    int checks = 0;
    std::vector<EnvelopeViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Evaluates every envelope inequality at each recorded iterate, plus the norm bound
// ||df(n)||_2 <= ||E||_F^(n-1) ||df(1)||_2. eta is the condition margin.
EnvelopeReport check_recovery_envelope(const RecoveryTrace& trace, const RadialGrid& grid, const GridMatrices& m, double eta,
                               double tol = 1e-10);

struct RecoveryCheck {
    double oracle_residual = 0.0;  // flow-equation residual of the recovered point
    double oracle_distance = 0.0;  // max deviation from an independent load flow on s
    bool oracle_converged = false;
    std::vector<Violation> operational;
    bool had_strict = false;
    double P1_input = 0.0, P1_recovered = 0.0;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

RecoveryCheck verify_recovery(const RecoveryTrace& trace, const RadialGrid& grid, double tol = 1e-8);

}  // namespace aropf
