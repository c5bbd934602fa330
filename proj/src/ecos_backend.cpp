#include <chrono>
#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "aropf/conic.hpp"

extern "C" {
#include "ecos.h"
}

namespace aropf {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, idxint>;

struct Csc {
    std::vector<pfloat> pr;
    std::vector<idxint> jc, ir;
};

Csc to_csc(const std::vector<Eigen::Triplet<double, idxint>>& trips, idxint rows, idxint cols) {
    SpMat m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    Csc out;
    out.pr.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
    out.ir.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
    out.jc.assign(m.outerIndexPtr(), m.outerIndexPtr() + cols + 1);
    return out;
}

}  // namespace

SolveResult EcosBackend::solve(const ConicProgram& program, const SolverSettings& settings) const {
    const idxint n = program.num_vars();
    std::vector<Eigen::Triplet<double, idxint>> at, gt;
    std::vector<pfloat> b, h;

    for (const auto& row : program.rows()) {
        if (row.kind != LinearRow::Kind::Eq) continue;
        const idxint i = static_cast<idxint>(b.size());
        for (const auto& [j, a] : row.expr.terms) at.emplace_back(i, j, a);
        b.push_back(-row.expr.constant);
    }
    for (const auto& row : program.rows()) {
        if (row.kind != LinearRow::Kind::Le) continue;
        const idxint i = static_cast<idxint>(h.size());
        for (const auto& [j, a] : row.expr.terms) gt.emplace_back(i, j, a);
        h.push_back(-row.expr.constant);
    }
    idxint l = static_cast<idxint>(h.size());
    if (l == 0 && program.cones().empty()) {
        h.push_back(1.0);  // ECOS needs at least one cone row
        l = 1;
    }
    std::vector<idxint> q;
    for (const auto& cone : program.cones()) {
        const auto entries = cone.standard_form();
        q.push_back(static_cast<idxint>(entries.size()));
        for (const auto& e : entries) {
            const idxint i = static_cast<idxint>(h.size());
            for (const auto& [j, a] : e.terms) gt.emplace_back(i, j, -a);
            h.push_back(e.constant);
        }
    }
    const idxint m = static_cast<idxint>(h.size());
    const idxint p = static_cast<idxint>(b.size());

    std::vector<pfloat> c(n, 0.0);
    const LinExpr obj = program.objective().compressed();
    for (const auto& [j, a] : obj.terms) c[j] += a;

    Csc G = to_csc(gt, m, n);
    Csc A = to_csc(at, p, n);

    SolveResult res;
    pwork* w = ECOS_setup(n, m, p, l, static_cast<idxint>(q.size()), q.empty() ? nullptr : q.data(), 0,
                          G.pr.data(), G.jc.data(), G.ir.data(), p ? A.pr.data() : nullptr,
                          p ? A.jc.data() : nullptr, p ? A.ir.data() : nullptr, c.data(), h.data(),
                          p ? b.data() : nullptr);
    if (!w) {
        res.message = "ECOS setup failed";
        return res;
    }
    w->stgs->verbose = settings.verbose ? 1 : 0;
    w->stgs->feastol = settings.feas_tol;
    w->stgs->abstol = settings.gap_tol;
    w->stgs->reltol = settings.gap_tol;
    w->stgs->maxit = settings.max_iter;

    const idxint code = ECOS_solve(w);
    res.backend_code = static_cast<int>(code);
    res.iterations = static_cast<int>(w->info->iter);
    res.x = Eigen::Map<const Eigen::VectorXd>(w->x, n);
    res.duality_gap = std::min(std::abs(w->info->gap), std::abs(w->info->relgap));
    ECOS_cleanup(w, 0);

    res.objective = obj.eval(res.x);
    res.primal_residual = program.max_violation(res.x);
    switch (code) {
        case ECOS_OPTIMAL:
            res.status = SolverStatus::Optimal;
            break;
        case ECOS_OPTIMAL + ECOS_INACC_OFFSET:
            res.status = res.primal_residual <= settings.feas_tol ? SolverStatus::Optimal : SolverStatus::NumericalFailure;
            res.message = "reduced accuracy";
            break;
        case ECOS_PINF:
        case ECOS_PINF + ECOS_INACC_OFFSET:
            res.status = SolverStatus::Infeasible;
            break;
        case ECOS_DINF:
        case ECOS_DINF + ECOS_INACC_OFFSET:
            res.status = SolverStatus::Unbounded;
            break;
        default:
            res.status = SolverStatus::NumericalFailure;
            res.message = "ECOS exit code " + std::to_string(code);
    }
    return res;
}

}  // namespace aropf
