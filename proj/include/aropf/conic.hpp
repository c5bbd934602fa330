#pragma once

// Second-order-cone programs over affine expressions of free variables:
//   minimize objective
//   subject to  eq rows == 0, le rows <= 0,
//               rotated cones u*w >= |t|^2 (u, w >= 0), plain cones |t| <= u.

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace aropf {

struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    LinExpr() = default;
    LinExpr(double c) : constant(c) {}  // NOLINT: implicit constants read naturally in row building
    static LinExpr var(int j, double a = 1.0) {
        LinExpr e;
        e.terms.emplace_back(j, a);
        return e;
    }

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double a);
    double eval(const Eigen::VectorXd& x) const;
    // Merge duplicate indices and drop zero coefficients.
    LinExpr compressed() const;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a);
LinExpr operator*(double s, LinExpr a);
LinExpr operator*(LinExpr a, double s);

struct LinearRow {
    enum class Kind { Eq, Le };
    LinExpr expr;
    Kind kind;
    std::string tag;
    int owner = 0;  // line or bus label the row belongs to, 0 for global rows
};

struct ConeBlock {
    bool rotated = true;
    LinExpr u, w;  // w unused for plain cones
    std::vector<LinExpr> t;
    std::string tag;
    int owner = 0;

    // Entries of the equivalent standard cone: (u + w, u - w, 2t) or (u, t).
    std::vector<LinExpr> standard_form() const;
    // Signed distance to the cone boundary at x; negative values are violations.
    double margin(const Eigen::VectorXd& x) const;
};

class ConicProgram {
public:
    int add_var(std::string name);
    int num_vars() const { return static_cast<int>(names_.size()); }
    const std::string& var_name(int j) const { return names_[j]; }

    void add_eq(LinExpr e, std::string tag, int owner = 0);
    void add_le(LinExpr e, std::string tag, int owner = 0);
    void add_ge(LinExpr e, std::string tag, int owner = 0) { add_le(-std::move(e), std::move(tag), owner); }
    // lo <= e <= hi; an equality row when lo == hi, skipped sides when infinite.
    void add_range(const LinExpr& e, double lo, double hi, const std::string& tag, int owner = 0);
    // slack >= |e| as two rows
    void add_abs_bound(const LinExpr& slack, const LinExpr& e, const std::string& tag, int owner = 0);
    void add_rotated_cone(LinExpr u, LinExpr w, std::vector<LinExpr> t, std::string tag, int owner = 0);
    void add_soc(LinExpr u, std::vector<LinExpr> t, std::string tag, int owner = 0);

    void add_objective(const LinExpr& e) { objective_ += e; }
    // coeff * e^2 with coeff >= 0, through an epigraph variable.
    void add_quadratic_objective(const LinExpr& e, double coeff, const std::string& tag);

    const LinExpr& objective() const { return objective_; }
    const std::vector<LinearRow>& rows() const { return rows_; }
    const std::vector<ConeBlock>& cones() const { return cones_; }

    int count_rows(const std::string& tag) const;
    int count_cones(const std::string& tag = "") const;

    // Largest violation of any row or cone at x (0 when feasible).
    double max_violation(const Eigen::VectorXd& x) const;

    // Conic Benchmark Format text, readable by external conic solvers.
    std::string to_cbf() const;

private:
    std::vector<std::string> names_;
    std::vector<LinearRow> rows_;
    std::vector<ConeBlock> cones_;
    LinExpr objective_;
};

enum class SolverStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
std::string to_string(SolverStatus s);

struct SolverSettings {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iter = 150;
    bool verbose = false;
};

struct SolveResult {
    SolverStatus status = SolverStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double primal_residual = std::numeric_limits<double>::infinity();
    double duality_gap = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int backend_code = 0;
    std::string message;
};

// Backend contract: any solver accepting linear rows and second-order cones.
class ConicBackend {
public:
    virtual ~ConicBackend() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve(const ConicProgram& program, const SolverSettings& settings) const = 0;
};

// Interior-point backend on the bundled ECOS library.
class EcosBackend : public ConicBackend {
public:
    std::string name() const override { return "ecos"; }
    SolveResult solve(const ConicProgram& program, const SolverSettings& settings) const override;
};

const ConicBackend& default_backend();

}  // namespace aropf
