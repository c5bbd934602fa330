#include "aropf/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aropf/errors.hpp"

namespace aropf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double up_value(const RadialGrid& grid, const VectorXd& v, int k) {
    const int u = grid.up_index(k);
    return u < 0 ? grid.v0 : v[u];
}

// Sum of children's flows plus the bus's own absorption.
double bottom_sum(const std::vector<std::vector<int>>& ch, const VectorXd& inj, const VectorXd& flow, int k) {
    double s = inj[k];
    for (int c : ch[k]) s += flow[c];
    return s;
}

}  // namespace

VectorXd longitudinal_q(const RadialGrid& grid, const VectorXd& Q, const VectorXd& v) {
    VectorXd qc(grid.size());
    for (int k = 0; k < grid.size(); ++k) qc[k] = Q[k] + grid.lines[k].b * up_value(grid, v, k);
    return qc;
}

RecoveryTrace recover(const OpfVariables& relaxed, const RadialGrid& grid, const GridMatrices& m,
                      const RecoveryOptions& opts) {
    const int L = grid.size();
    RecoveryTrace tr;
    tr.input = relaxed;

    // The lossless quantities are functions of s alone; recomputing them keeps the solver's
    // residual out of the fixed point.
    tr.P_hat = m.H * relaxed.p;
    tr.v_bar = auxiliary_voltage(grid, m, relaxed.p, relaxed.q);
    tr.Qc_hat = m.H * relaxed.q - m.H * m.B.asDiagonal() * tr.v_bar;

    const VectorXd r = grid.r();
    const MatrixXd Hr = m.H * r.asDiagonal();

    RecoveryIterate it{relaxed.f, relaxed.P, longitudinal_q(grid, relaxed.Q, relaxed.v), relaxed.v};
    tr.iterates.push_back(it);

    int growth = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= opts.max_iter; ++n) {
        const RecoveryIterate& last = tr.iterates.back();
        RecoveryIterate next;
        next.f.resize(L);
        for (int k = 0; k < L; ++k) {
            const double vu = up_value(grid, last.v, k);
            next.f[k] = (last.P[k] * last.P[k] + last.Qc[k] * last.Qc[k]) / vu;
        }
        next.P = tr.P_hat + Hr * next.f;
        next.Qc = tr.Qc_hat + m.F * next.f;
        next.v = tr.v_bar - m.D * next.f;

        const VectorXd df = next.f - last.f;
        const double dinf = df.cwiseAbs().maxCoeff();
        tr.delta_f_inf.push_back(dinf);
        tr.delta_f_two.push_back(df.norm());
        tr.iterates.push_back(next);

        if ((next.v.array() <= 0.0).any()) {
            std::ostringstream msg;
            msg << "voltage collapse at iteration " << n;
            throw RecoveryError(RecoveryError::Kind::VoltageCollapse, msg.str());
        }
        if (dinf <= opts.tol) {
            tr.converged = true;
            break;
        }
        growth = dinf > prev ? growth + 1 : 0;
        prev = dinf;
        if (growth >= opts.divergence_window) {
            std::ostringstream msg;
            msg << "fixed point diverges (" << growth << " consecutive growth steps); the sufficient conditions"
                << " are probably not met at this operating point";
            throw RecoveryError(RecoveryError::Kind::Divergence, msg.str());
        }
    }
    if (!tr.converged) return tr;

    const RecoveryIterate& fin = tr.iterates.back();
    OpfVariables& out = tr.recovered;
    out.p = relaxed.p;
    out.q = relaxed.q;
    out.f = fin.f;
    out.P = fin.P;
    out.v = fin.v;
    out.Q.resize(L);
    for (int k = 0; k < L; ++k) out.Q[k] = fin.Qc[k] - grid.lines[k].b * up_value(grid, fin.v, k);
    out.P_hat = tr.P_hat;
    out.v_bar = tr.v_bar;
    out.Q_hat.resize(L);
    for (int k = 0; k < L; ++k) out.Q_hat[k] = tr.Qc_hat[k] - grid.lines[k].b * up_value(grid, tr.v_bar, k);
    rebuild_upper_bounds(out, grid);
    return tr;
}

void rebuild_upper_bounds(OpfVariables& vars, const RadialGrid& grid) {
    const int L = grid.size();
    const auto ch = grid.children();
    const auto order = grid.topological_order();
    vars.f_bar = VectorXd::Zero(L);
    vars.P_bar = VectorXd::Zero(L);
    vars.Q_bar = VectorXd::Zero(L);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int k = *it;
        const Line& ln = grid.lines[k];
        const double v = vars.v[k], vb = vars.v_bar[k];
        const double vu = up_value(grid, vars.v, k), vbu = up_value(grid, vars.v_bar, k);
        const double Phb = bottom_sum(ch, vars.p, vars.P_hat, k), Qhb = bottom_sum(ch, vars.q, vars.Q_hat, k);
        const double Pbb = bottom_sum(ch, vars.p, vars.P_bar, k), Qbb = bottom_sum(ch, vars.q, vars.Q_bar, k);

        const double bot = (std::max(Phb * Phb, Pbb * Pbb) +
                            std::max(std::pow(Qhb - ln.b * vb, 2), std::pow(Qbb - ln.b * v, 2))) /
                           v;
        auto top = [&](double fb) {
            const double Pt = Pbb + ln.r * fb;
            const double Qt = Qbb + ln.x * fb - ln.b * v;  // Q_bar + b v_up
            return (std::max(std::pow(vars.P_hat[k], 2), Pt * Pt) +
                    std::max(std::pow(vars.Q_hat[k] + ln.b * vbu, 2), Qt * Qt)) /
                   vu;
        };
        // least fixed point of fb = max(bot, f, top(fb)); top is increasing and nearly flat.
        // At exact points f never binds; on relaxed points it keeps f <= f_bar.
        const double floor = std::max(bot, vars.f[k]);
        double fb = floor;
        for (int i = 0; i < 200; ++i) {
            const double nxt = std::max(floor, top(fb));
            if (nxt <= fb * (1 + 1e-15) + 1e-300) {
                fb = std::max(fb, nxt);
                break;
            }
            fb = nxt;
            if (i == 199) throw RecoveryError(RecoveryError::Kind::NoConvergence, "upper bound rebuild does not settle");
        }
        vars.f_bar[k] = fb;
        vars.P_bar[k] = Pbb + ln.r * fb;
        vars.Q_bar[k] = Qbb + ln.x * fb - (vu + v) * ln.b;
    }
}

OpfVariables inflate_losses(const OpfVariables& vars, const RadialGrid& grid, const GridMatrices& m,
                            const VectorXd& delta) {
    if ((delta.array() < 0).any()) throw std::invalid_argument("loss inflation must be non-negative");
    const int L = grid.size();
    OpfVariables out = vars;
    const VectorXd v_bar = auxiliary_voltage(grid, m, vars.p, vars.q);
    const VectorXd Qc_hat = m.H * vars.q - m.H * m.B.asDiagonal() * v_bar;
    out.P_hat = m.H * vars.p;
    out.v_bar = v_bar;
    out.Q_hat.resize(L);
    for (int k = 0; k < L; ++k) out.Q_hat[k] = Qc_hat[k] - grid.lines[k].b * up_value(grid, v_bar, k);

    out.f = vars.f + delta;
    out.Q.resize(L);
    // Extra losses downstream raise the flows upstream; top up f where that breaks the
    // relaxation cone so the result stays a feasible relaxed point.
    for (int it = 0;; ++it) {
        out.P = out.P_hat + m.H * grid.r().asDiagonal() * out.f;
        out.v = v_bar - m.D * out.f;
        const VectorXd Qc = Qc_hat + m.F * out.f;
        for (int k = 0; k < L; ++k) out.Q[k] = Qc[k] - grid.lines[k].b * up_value(grid, out.v, k);
        const VectorXd gap = exactness_gap(out, grid);
        if (gap.minCoeff() >= 0.0) break;
        if (it == 100) throw std::runtime_error("loss inflation cannot restore the relaxation cones");
        for (int k = 0; k < L; ++k)
            if (gap[k] < 0) out.f[k] += -gap[k] * (1 + 1e-9) + 1e-16;
    }
    rebuild_upper_bounds(out, grid);
    return out;
}

EnvelopeReport check_recovery_envelope(const RecoveryTrace& tr, const RadialGrid& grid, const GridMatrices& m, double eta,
                               double tol) {
    EnvelopeReport rep;
    const int L = grid.size();
    const OpfVariables& in = tr.input;
    const int N = tr.iterations();
    if (N < 1) return rep;

    rep.strict = strict_lines(exactness_gap(in, grid));
    if (!rep.strict.empty()) {
        for (int l = 0; l < L; ++l) {
            bool all = true;
            for (int s : rep.strict) all = all && m.H(l, s - 1) > 0.5;
            if (all) rep.upstream.push_back(l + 1);
        }
    }

    auto check = [&](int n, const char* fam, int line, double lhs, double rhs) {
        ++rep.checks;
        if (lhs > rhs + tol) rep.violations.push_back({n, fam, line, lhs, rhs});
    };

    const auto& I = tr.iterates;
    const VectorXd df1 = (I[1].f - I[0].f).cwiseAbs();
    const VectorXd dv1 = (I[1].v - I[0].v).cwiseAbs();
    const VectorXd dP1 = (I[1].P - I[0].P).cwiseAbs();
    const double n1 = tr.delta_f_two[0];
    const double enorm = m.E.norm();
    VectorXd env = df1;  // E^(n-1) |df(1)|
    const bool has_aux = in.has_aux();

    for (int n = 1; n <= N; ++n) {
        if (n > 1) env = m.E * env;
        const double geo = std::pow(eta, n - 1);
        const VectorXd df = (I[n].f - I[n - 1].f).cwiseAbs();
        const VectorXd dv = (I[n].v - I[n - 1].v).cwiseAbs();
        const VectorXd dP = (I[n].P - I[n - 1].P).cwiseAbs();
        for (int k = 0; k < L; ++k) {
            const int id = k + 1;
            check(n, "df", id, df[k], env[k]);
            check(n, "dv", id, dv[k], geo * dv1[k]);
            check(n, "v-lower", id, in.v[k], I[n].v[k]);
            if (has_aux) {
                check(n, "f-bar", id, I[n].f[k], in.f_bar[k]);
                check(n, "P-bar", id, I[n].P[k], in.P_bar[k]);
                check(n, "Qc-bar", id, I[n].Qc[k], in.Q_bar[k] + grid.lines[k].b * up_value(grid, in.v, k));
            }
        }
        for (int id : rep.upstream) {
            const int k = id - 1;
            check(n, "dP-upstream", id, dP[k], geo * dP1[k]);
            check(n, "P-upstream", id, I[n].P[k], in.P[k]);
        }
        check(n, "norm", 0, tr.delta_f_two[n - 1], std::pow(enorm, n - 1) * n1);
    }
    return rep;
}

RecoveryCheck verify_recovery(const RecoveryTrace& tr, const RadialGrid& grid, double tol) {
    RecoveryCheck rep;
    if (!tr.converged) {
        rep.failures.push_back("recovery did not converge");
        return rep;
    }
    const OpfVariables& out = tr.recovered;
    const int L = grid.size();
    const std::vector<cplx> s = out.injections();
    std::vector<cplx> S(L);
    std::vector<double> v(L), f(L);
    for (int k = 0; k < L; ++k) {
        S[k] = {out.P[k], out.Q[k]};
        v[k] = out.v[k];
        f[k] = out.f[k];
    }
    rep.oracle_residual = flow_residual(grid, s, S, v, f);
    if (rep.oracle_residual > tol) rep.failures.push_back("recovered point violates the flow equations");

    try {
        const LoadFlowState lf = solve_loadflow(grid, s);
        rep.oracle_converged = true;
        for (int k = 0; k < L; ++k) {
            rep.oracle_distance = std::max({rep.oracle_distance, std::abs(lf.S_top[k] - S[k]), std::abs(lf.v[k] - v[k]),
                                            std::abs(lf.f[k] - f[k])});
        }
        if (rep.oracle_distance > tol) rep.failures.push_back("recovered point differs from the independent load flow");
        const auto ch = grid.children();
        LoadFlowState mine = lf;
        mine.S_top = S;
        mine.v = v;
        mine.f = f;
        for (int k = 0; k < L; ++k) {
            double pb = s[k].real(), qb = s[k].imag();
            for (int c : ch[k]) {
                pb += out.P[c];
                qb += out.Q[c];
            }
            mine.S_bot[k] = {pb, qb};
        }
        rep.operational = check_operational(mine, grid, tol);
        if (!rep.operational.empty()) rep.failures.push_back("recovered point violates operational limits");
    } catch (const LoadFlowError& e) {
        rep.failures.push_back(std::string("independent load flow failed: ") + e.what());
    }

    rep.had_strict = !strict_lines(exactness_gap(tr.input, grid)).empty();
    rep.P1_input = tr.input.P[0];
    rep.P1_recovered = out.P[0];
    if (rep.had_strict && !(rep.P1_recovered < rep.P1_input))
        rep.failures.push_back("import did not decrease although the relaxation was not tight");
    return rep;
}

}  // namespace aropf
