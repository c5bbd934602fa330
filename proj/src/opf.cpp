#include "aropf/opf.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "aropf/errors.hpp"
#include "aropf/keyvalue.hpp"

namespace aropf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<cplx> OpfVariables::injections() const {
    std::vector<cplx> s(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) s[k] = {p[k], q[k]};
    return s;
}

std::string to_string(OpfModel m) { return m == OpfModel::ArOpf ? "aropf" : "ropf"; }

CostModel parse_cost(std::string_view text, const RadialGrid& grid) {
    KvDocument doc = parse_keyvalue(text);
    CostModel cost;
    cost.bus.assign(grid.size(), BusCost{});
    for (const auto& e : doc.top.entries) {
        if (e.key == "import_slope") cost.import_slope = kv_number(e);
        else if (e.key == "import_offset") cost.import_offset = kv_number(e);
        else throw ParseError(e.line, e.key, "unknown cost key");
    }
    if (!(cost.import_slope > 0)) throw ValidationError("import cost slope must be strictly positive");
    for (const auto& sec : doc.sections) {
        if (sec.kind != "bus") throw ParseError(sec.line, sec.kind, "unknown section in cost file");
        const int idx = grid.index_of_label(sec.label);
        if (idx <= 0) throw ParseError(sec.line, sec.label, "unknown bus");
        BusCost& bc = cost.bus[idx - 1];
        for (const auto& e : sec.entries) {
            const double v = kv_number(e);
            if (e.key == "lin_p") bc.lin_p = v;
            else if (e.key == "lin_q") bc.lin_q = v;
            else if (e.key == "quad_p") bc.quad_p = v;
            else if (e.key == "quad_q") bc.quad_q = v;
            else throw ParseError(e.line, e.key, "unknown cost key");
            if ((e.key == "quad_p" || e.key == "quad_q") && v < 0) throw ParseError(e.line, e.key, "must be >= 0");
        }
    }
    return cost;
}

namespace {

LinExpr var(int j, double a = 1.0) { return LinExpr::var(j, a); }

std::vector<int> make_vars(ConicProgram& prog, const RadialGrid& grid, const std::string& stem) {
    std::vector<int> ids(grid.size());
    for (int k = 0; k < grid.size(); ++k) ids[k] = prog.add_var(stem + "[" + grid.labels[k + 1] + "]");
    return ids;
}

// Bus-side quantity: injection plus the sum of the children's top flows.
LinExpr bottom(const std::vector<std::vector<int>>& ch, const std::vector<int>& inj, const std::vector<int>& flow, int k) {
    LinExpr e = var(inj[k]);
    for (int m : ch[k]) e += var(flow[m]);
    return e;
}

void add_injection_rows(ConicProgram& prog, const RadialGrid& grid, const std::vector<int>& p, const std::vector<int>& q) {
    for (int k = 0; k < grid.size(); ++k) {
        const Bus& bus = grid.buses[k];
        const int id = k + 1;
        prog.add_range(var(p[k]), bus.p_min, bus.p_max, "injection-bounds", id);
        prog.add_range(var(q[k]), bus.q_min, bus.q_max, "injection-bounds", id);
        const double t = bus.injection.tan_phi();
        switch (bus.injection.kind) {
            case InjectionSet::Kind::Box: break;
            case InjectionSet::Kind::FixedPowerFactor:
                prog.add_eq(var(q[k]) - var(p[k], bus.injection.leading ? -t : t), "power-factor", id);
                break;
            case InjectionSet::Kind::MinPowerFactor: {
                double sign;
                if (bus.p_max <= 0) sign = -1.0;
                else if (bus.p_min >= 0) sign = 1.0;
                else
                    throw std::invalid_argument("bus " + grid.labels[id] +
                                                ": a minimum power factor needs an active-power range of one sign");
                prog.add_abs_bound(var(p[k], sign * t), var(q[k]), "power-factor", id);
                break;
            }
        }
    }
}

void add_cost(ConicProgram& prog, const RadialGrid& grid, const CostModel& cost, const std::vector<int>& p,
              const std::vector<int>& q, int P1) {
    if (!(cost.import_slope > 0)) throw std::invalid_argument("import cost slope must be strictly positive");
    prog.add_objective(var(P1, cost.import_slope) + LinExpr(cost.import_offset));
    if (cost.bus.empty()) return;
    if (static_cast<int>(cost.bus.size()) != grid.size()) throw std::invalid_argument("cost vector size mismatch");
    for (int k = 0; k < grid.size(); ++k) {
        const BusCost& bc = cost.bus[k];
        prog.add_objective(var(p[k], bc.lin_p) + var(q[k], bc.lin_q));
        prog.add_quadratic_objective(var(p[k]), bc.quad_p, "cost-p" + grid.labels[k + 1]);
        prog.add_quadratic_objective(var(q[k]), bc.quad_q, "cost-q" + grid.labels[k + 1]);
    }
}

// Flow equations and relaxation cone shared by both models.
void add_branch_flow(OpfProblem& pr) {
    const RadialGrid& g = pr.grid;
    ConicProgram& prog = pr.program;
    const auto ch = g.children();
    for (int k = 0; k < g.size(); ++k) {
        const Line& ln = g.lines[k];
        const int id = k + 1;
        const int u = g.up_index(k);
        const LinExpr vu = u < 0 ? LinExpr(g.v0) : var(pr.v[u]);
        const LinExpr Pb = bottom(ch, pr.p, pr.P, k);
        const LinExpr Qb = bottom(ch, pr.q, pr.Q, k);
        prog.add_eq(var(pr.P[k]) - Pb - var(pr.f[k], ln.r), "flow-active", id);
        prog.add_eq(var(pr.Q[k]) - Qb - var(pr.f[k], ln.x) + ln.b * (vu + var(pr.v[k])), "flow-reactive", id);
        prog.add_eq(var(pr.v[k]) - vu + 2.0 * (var(pr.P[k], ln.r) + ln.x * (var(pr.Q[k]) + ln.b * vu)) -
                        var(pr.f[k], ln.r * ln.r + ln.x * ln.x),
                    "voltage-drop", id);
        prog.add_rotated_cone(var(pr.f[k]), vu, {var(pr.P[k]), var(pr.Q[k]) + ln.b * vu}, "relaxation-cone", id);
    }
}

void create_base_vars(OpfProblem& pr) {
    pr.p = make_vars(pr.program, pr.grid, "p");
    pr.q = make_vars(pr.program, pr.grid, "q");
    pr.P = make_vars(pr.program, pr.grid, "P");
    pr.Q = make_vars(pr.program, pr.grid, "Q");
    pr.v = make_vars(pr.program, pr.grid, "v");
    pr.f = make_vars(pr.program, pr.grid, "f");
}

}  // namespace

OpfProblem build_ar_opf(const RadialGrid& grid, const OperatingBounds& bounds, const CostModel& cost,
                        const ArOpfOptions& opts) {
    for (const auto& bus : grid.buses)
        if (bus.p_min > bus.p_max || bus.q_min > bus.q_max) throw std::invalid_argument("inconsistent injection bounds");
    OpfProblem pr;
    pr.model = OpfModel::ArOpf;
    pr.grid = grid;
    create_base_vars(pr);
    ConicProgram& prog = pr.program;
    pr.P_hat = make_vars(prog, grid, "P_hat");
    pr.Q_hat = make_vars(prog, grid, "Q_hat");
    pr.v_bar = make_vars(prog, grid, "v_bar");
    pr.f_bar = make_vars(prog, grid, "f_bar");
    pr.P_bar = make_vars(prog, grid, "P_bar");
    pr.Q_bar = make_vars(prog, grid, "Q_bar");

    add_injection_rows(prog, grid, pr.p, pr.q);
    add_branch_flow(pr);

    const auto ch = grid.children();
    for (int k = 0; k < grid.size(); ++k) {
        const Line& ln = grid.lines[k];
        const int id = k + 1;
        const int u = grid.up_index(k);
        const LinExpr vu = u < 0 ? LinExpr(grid.v0) : var(pr.v[u]);
        const LinExpr vbu = u < 0 ? LinExpr(grid.v0) : var(pr.v_bar[u]);
        const LinExpr v = var(pr.v[k]), vb = var(pr.v_bar[k]);
        const LinExpr Ph = var(pr.P_hat[k]), Qh = var(pr.Q_hat[k]);
        const LinExpr Pbar = var(pr.P_bar[k]), Qbar = var(pr.Q_bar[k]), fb = var(pr.f_bar[k]);
        const LinExpr Phb = bottom(ch, pr.p, pr.P_hat, k), Qhb = bottom(ch, pr.q, pr.Q_hat, k);
        const LinExpr Pbb = bottom(ch, pr.p, pr.P_bar, k), Qbb = bottom(ch, pr.q, pr.Q_bar, k);

        // lossless lower system
        prog.add_eq(Ph - Phb, "aux-lossless-flow", id);
        prog.add_eq(Qh - Qhb + ln.b * (vbu + vb), "aux-lossless-flow", id);
        prog.add_eq(vb - vbu + 2.0 * (ln.r * Ph + ln.x * (Qh + ln.b * vbu)), "aux-lossless-voltage", id);
        // upper system with the current bound f_bar
        prog.add_eq(Pbar - Pbb - ln.r * fb, "aux-upper-flow", id);
        prog.add_eq(Qbar - Qbb - ln.x * fb + ln.b * (vu + v), "aux-upper-flow", id);

        // f_bar dominates the series current implied by either system, at both ends
        const int a_bot = prog.add_var("sP_bot[" + grid.labels[id] + "]");
        const int q_bot = prog.add_var("sQ_bot[" + grid.labels[id] + "]");
        const int a_top = prog.add_var("sP_top[" + grid.labels[id] + "]");
        const int q_top = prog.add_var("sQ_top[" + grid.labels[id] + "]");
        prog.add_abs_bound(var(a_bot), Phb, "aux-bottom-slack", id);
        prog.add_abs_bound(var(a_bot), Pbb, "aux-bottom-slack", id);
        prog.add_abs_bound(var(q_bot), Qhb - ln.b * vb, "aux-bottom-slack", id);
        prog.add_abs_bound(var(q_bot), Qbb - ln.b * v, "aux-bottom-slack", id);
        prog.add_rotated_cone(fb, v, {var(a_bot), var(q_bot)}, "aux-bottom-cone", id);
        prog.add_abs_bound(var(a_top), Ph, "aux-top-slack", id);
        prog.add_abs_bound(var(a_top), Pbar, "aux-top-slack", id);
        prog.add_abs_bound(var(q_top), Qh + ln.b * vbu, "aux-top-slack", id);
        prog.add_abs_bound(var(q_top), Qbar + ln.b * vu, "aux-top-slack", id);
        prog.add_rotated_cone(fb, vu, {var(a_top), var(q_top)}, "aux-top-cone", id);

        if (opts.voltage_limits) {
            prog.add_le(LinExpr(bounds.v_min) - v, "voltage-lower", id);
            prog.add_le(vb - LinExpr(bounds.v_max), "voltage-upper-aux", id);
        }
        if (opts.ampacity_limits) {
            const int c_bot = prog.add_var("sQamp_bot[" + grid.labels[id] + "]");
            const int c_top = prog.add_var("sQamp_top[" + grid.labels[id] + "]");
            prog.add_abs_bound(var(c_bot), Qhb, "ampacity-slack", id);
            prog.add_abs_bound(var(c_bot), Qbb, "ampacity-slack", id);
            prog.add_rotated_cone(v, LinExpr(ln.i_max_sq), {var(a_bot), var(c_bot)}, "ampacity-bottom", id);
            prog.add_abs_bound(var(c_top), Qh, "ampacity-slack", id);
            prog.add_abs_bound(var(c_top), Qbar, "ampacity-slack", id);
            prog.add_rotated_cone(vu, LinExpr(ln.i_max_sq), {var(a_top), var(c_top)}, "ampacity-top", id);
        }
        if (opts.aux_technical) {
            prog.add_le(var(pr.P[k]) - Pbar, "aux-technical", id);
            prog.add_le(Pbar - LinExpr(bounds.P_max[k]), "aux-technical", id);
            prog.add_le(var(pr.Q[k]) - Qbar, "aux-technical", id);
            prog.add_le(Qbar - LinExpr(bounds.Q_max[k]), "aux-technical", id);
        }
    }
    add_cost(prog, grid, cost, pr.p, pr.q, pr.P[0]);
    return pr;
}

OpfProblem build_r_opf(const RadialGrid& grid, const CostModel& cost) {
    for (const auto& bus : grid.buses)
        if (bus.p_min > bus.p_max || bus.q_min > bus.q_max) throw std::invalid_argument("inconsistent injection bounds");
    OpfProblem pr;
    pr.model = OpfModel::ROpf;
    pr.grid = grid;
    create_base_vars(pr);
    ConicProgram& prog = pr.program;
    add_injection_rows(prog, grid, pr.p, pr.q);
    add_branch_flow(pr);
    const auto ch = grid.children();
    for (int k = 0; k < grid.size(); ++k) {
        const int id = k + 1;
        const int u = grid.up_index(k);
        const LinExpr vu = u < 0 ? LinExpr(grid.v0) : var(pr.v[u]);
        prog.add_range(var(pr.v[k]), grid.v_min, grid.v_max, "voltage-limits", id);
        const double imax = grid.lines[k].i_max_sq;
        prog.add_rotated_cone(var(pr.v[k]), LinExpr(imax), {bottom(ch, pr.p, pr.P, k), bottom(ch, pr.q, pr.Q, k)},
                              "ampacity-bottom", id);
        prog.add_rotated_cone(vu, LinExpr(imax), {var(pr.P[k]), var(pr.Q[k])}, "ampacity-top", id);
    }
    add_cost(prog, grid, cost, pr.p, pr.q, pr.P[0]);
    return pr;
}

namespace {

VectorXd pick(const VectorXd& x, const std::vector<int>& ids) {
    VectorXd out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = x[ids[i]];
    return out;
}

}  // namespace

OpfSolution solve(const OpfProblem& problem, const ConicBackend& backend, const SolverSettings& settings) {
    OpfSolution sol;
    sol.model = problem.model;
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res;
    try {
        res = backend.solve(problem.program, settings);
    } catch (const std::exception& e) {
        res.status = SolverStatus::NumericalFailure;
        res.message = e.what();
    }
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sol.status = res.status;
    sol.objective = res.objective;
    sol.primal_residual = res.primal_residual;
    sol.duality_gap = res.duality_gap;
    sol.iterations = res.iterations;
    sol.message = res.message;
    if (res.x.size() != problem.program.num_vars()) return sol;
    const VectorXd& x = res.x;
    sol.vars.p = pick(x, problem.p);
    sol.vars.q = pick(x, problem.q);
    sol.vars.P = pick(x, problem.P);
    sol.vars.Q = pick(x, problem.Q);
    sol.vars.v = pick(x, problem.v);
    sol.vars.f = pick(x, problem.f);
    if (problem.model == OpfModel::ArOpf) {
        sol.vars.P_hat = pick(x, problem.P_hat);
        sol.vars.Q_hat = pick(x, problem.Q_hat);
        sol.vars.v_bar = pick(x, problem.v_bar);
        sol.vars.f_bar = pick(x, problem.f_bar);
        sol.vars.P_bar = pick(x, problem.P_bar);
        sol.vars.Q_bar = pick(x, problem.Q_bar);
    }
    sol.exactness_gap = exactness_gap(sol.vars, problem.grid);
    return sol;
}

VectorXd exactness_gap(const OpfVariables& vars, const RadialGrid& grid) {
    const int L = grid.size();
    VectorXd gap(L);
    for (int k = 0; k < L; ++k) {
        const int u = grid.up_index(k);
        const double vu = u < 0 ? grid.v0 : vars.v[u];
        const double qc = vars.Q[k] + vu * grid.lines[k].b;
        gap[k] = vars.f[k] - (vars.P[k] * vars.P[k] + qc * qc) / vu;
    }
    return gap;
}

std::vector<int> strict_lines(const VectorXd& gap, double threshold) {
    std::vector<int> out;
    for (Eigen::Index k = 0; k < gap.size(); ++k)
        if (gap[k] > threshold) out.push_back(static_cast<int>(k) + 1);
    return out;
}

double auxiliary_bound_violation(const OpfVariables& vars) {
    if (!vars.has_aux()) throw std::invalid_argument("solution has no auxiliary variables");
    double worst = 0.0;
    worst = std::max(worst, (vars.f - vars.f_bar).maxCoeff());
    worst = std::max(worst, (vars.v - vars.v_bar).maxCoeff());
    worst = std::max(worst, (vars.P_hat - vars.P).maxCoeff());
    worst = std::max(worst, (vars.P - vars.P_bar).maxCoeff());
    worst = std::max(worst, (vars.Q_hat - vars.Q).maxCoeff());
    worst = std::max(worst, (vars.Q - vars.Q_bar).maxCoeff());
    return worst;
}

double matrix_form_residual(const OpfVariables& vars, const RadialGrid& grid, const GridMatrices& m) {
    const auto L = grid.size();
    const MatrixXd I = MatrixXd::Identity(L, L);
    const VectorXd b = grid.b();
    double worst = 0.0;
    worst = std::max(worst, (vars.P_hat - m.H * vars.p).cwiseAbs().maxCoeff());
    worst = std::max(worst, (vars.Q_hat - (m.H * vars.q - m.H * b.asDiagonal() * (I + m.G.transpose()) * vars.v_bar -
                                           m.H * b.asDiagonal() * Eigen::VectorXd::Unit(L, 0) * grid.v0))
                                .cwiseAbs()
                                .maxCoeff());
    worst = std::max(worst, (vars.P - (vars.P_hat + m.H * grid.r().asDiagonal() * vars.f)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (vars.v - (vars.v_bar - m.D * vars.f)).cwiseAbs().maxCoeff());
    return worst;
}

OriginalFeasibility check_original(const RadialGrid& grid, const std::vector<cplx>& s, double tol) {
    OriginalFeasibility out;
    for (int k = 0; k < grid.size(); ++k) {
        const Bus& bus = grid.buses[k];
        const std::string who = "bus " + grid.labels[k + 1];
        if (s[k].real() < bus.p_min - tol || s[k].real() > bus.p_max + tol) out.injection.push_back(who + ": p outside bounds");
        if (s[k].imag() < bus.q_min - tol || s[k].imag() > bus.q_max + tol) out.injection.push_back(who + ": q outside bounds");
    }
    try {
        out.state = solve_loadflow(grid, s);
        out.loadflow_converged = true;
        out.operational = check_operational(out.state, grid, tol);
    } catch (const LoadFlowError&) {
        out.loadflow_converged = false;
    }
    return out;
}

}  // namespace aropf
