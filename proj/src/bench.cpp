#include "aropf/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "aropf/errors.hpp"
#include "aropf/recovery.hpp"

namespace aropf {

using Eigen::VectorXd;

namespace {

const std::string* hint(const RadialGrid& grid, const std::string& key) {
    auto it = grid.bench.find(key);
    return it == grid.bench.end() ? nullptr : &it->second;
}

double hint_number(const RadialGrid& grid, const std::string& key, double dflt) {
    const std::string* h = hint(grid, key);
    if (!h) return dflt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(*h, &pos);
        if (pos != h->size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bench hint '" + key + "' is not a number: " + *h);
    }
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double up_value(const RadialGrid& grid, const VectorXd& v, int k) {
    const int u = grid.up_index(k);
    return u < 0 ? grid.v0 : v[u];
}

}  // namespace

SweepRule parse_sweep_rule(const std::string& s) {
    if (s == "load_share") return SweepRule::LoadShare;
    if (s == "capability") return SweepRule::Capability;
    throw ValidationError("unknown sweep rule '" + s + "' (expected load_share or capability)");
}

std::string to_string(SweepRule r) { return r == SweepRule::LoadShare ? "load_share" : "capability"; }

PmaxRule parse_pmax_rule(const std::string& s) {
    if (s == "pct110") return PmaxRule::Pct110;
    if (s == "loadflow") return PmaxRule::LoadFlow;
    throw ValidationError("unknown P_max rule '" + s + "' (expected pct110 or loadflow)");
}

SweepRule sweep_rule_of(const RadialGrid& grid) {
    const std::string* h = hint(grid, "sweep_rule");
    return h ? parse_sweep_rule(*h) : SweepRule::LoadShare;
}

PmaxRule pmax_rule_of(const RadialGrid& grid) {
    const std::string* h = hint(grid, "pmax_rule");
    return h ? parse_pmax_rule(*h) : PmaxRule::Pct110;
}

RadialGrid scale_injection(const RadialGrid& grid, SweepRule rule, double k) {
    RadialGrid g = grid;
    for (auto& bus : g.buses) {
        if (rule == SweepRule::LoadShare) bus.p_min = (1.0 - k) * bus.p_max;
        else bus.p_min = bus.p_max - k * (bus.p_max - bus.p_min);
    }
    return g;
}

double sweep_axis_mw(const RadialGrid& grid, SweepRule rule, double k) {
    double load = 0.0, capacity = 0.0;
    for (const auto& bus : grid.buses) {
        load += bus.p_max;
        capacity += bus.p_max - bus.p_min;
    }
    const double pu = rule == SweepRule::LoadShare ? (k - 1.0) * load : k * capacity;
    return pu * grid.base.s_base / 1e6;
}

RadialGrid fix_injection(const RadialGrid& grid, const std::vector<cplx>& s) {
    RadialGrid g = grid;
    for (int k = 0; k < g.size(); ++k) {
        Bus& bus = g.buses[k];
        bus.p_min = bus.p_max = s[k].real();
        bus.q_min = bus.q_max = s[k].imag();
        bus.injection = InjectionSet{};
    }
    return g;
}

std::vector<cplx> min_injection(const RadialGrid& grid) {
    std::vector<cplx> s(grid.size());
    for (int k = 0; k < grid.size(); ++k) s[k] = {grid.buses[k].p_min, grid.buses[k].q_min};
    return s;
}

// --- 3-bus comparison ------------------------------------------------------

double CurrentProfile::max_current_a() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max({m, r.top_a, r.bottom_a});
    return m;
}

namespace {

void fill_currents(CurrentProfile& prof, const RadialGrid& grid) {
    const LoadFlowState lf = solve_loadflow(grid, prof.s);
    const TerminalCurrents tc = terminal_currents(lf, grid);
    const double ib = grid.base.current_base();
    std::vector<double> pos_bot(grid.size(), 0.0);
    prof.limit_a = std::numeric_limits<double>::infinity();
    for (int k : grid.topological_order()) {
        const Line& ln = grid.lines[k];
        const int u = grid.up_index(k);
        TerminalCurrentRow row;
        row.line = k + 1;
        row.label = grid.labels[k + 1];
        row.pos_top_km = u < 0 ? 0.0 : pos_bot[u];
        row.pos_bot_km = row.pos_top_km + (ln.length_km > 0 ? ln.length_km : 1.0);
        pos_bot[k] = row.pos_bot_km;
        row.top_a = std::sqrt(tc.top_sq[k]) * ib;
        row.bottom_a = std::sqrt(tc.bottom_sq[k]) * ib;
        prof.rows.push_back(row);
        prof.limit_a = std::min(prof.limit_a, std::sqrt(ln.i_max_sq) * ib);
    }
}

CurrentProfile run_model(const std::string& name, const RadialGrid& real, const OpfProblem& prob, bool try_recovery,
                         const OperatingBounds* bounds) {
    CurrentProfile prof;
    prof.model = name;
    const auto t0 = std::chrono::steady_clock::now();
    const OpfSolution sol = solve(prob);
    prof.status = sol.status;
    prof.objective = sol.objective;
    if (sol.status != SolverStatus::Optimal) {
        prof.note = "solver: " + to_string(sol.status) + (sol.message.empty() ? "" : " (" + sol.message + ")");
        prof.seconds = seconds_since(t0);
        return prof;
    }
    prof.max_gap = sol.exactness_gap.maxCoeff();
    prof.s = sol.vars.injections();
    if (try_recovery && bounds) {
        try {
            const GridMatrices m = build_matrices(prob.grid, *bounds);
            const RecoveryTrace tr = recover(sol.vars, prob.grid, m);
            prof.recovered = tr.converged;
        } catch (const std::exception& e) {
            prof.note = std::string("recovery: ") + e.what();
        }
    }
    try {
        fill_currents(prof, real);
    } catch (const LoadFlowError& e) {
        prof.note = std::string("load flow: ") + e.what();
    }
    prof.seconds = seconds_since(t0);
    return prof;
}

}  // namespace

ThreeBusComparison run_threebus_comparison(const RadialGrid& grid, const CostModel& cost) {
    ThreeBusComparison out;
    const PmaxRule rule = pmax_rule_of(grid);

    const OperatingBounds bounds = default_bounds(grid, rule);
    out.aropf = run_model("aropf", grid, build_ar_opf(grid, bounds, cost), true, &bounds);
    out.ropf = run_model("ropf", grid, build_r_opf(grid, cost), false, nullptr);

    const RadialGrid bare = without_shunts(grid);
    const OperatingBounds bare_bounds = default_bounds(bare, rule);
    out.no_shunt = run_model("aropf-no-shunt", grid, build_ar_opf(bare, bare_bounds, cost), false, nullptr);
    return out;
}

void write_threebus_csv(std::ostream& out, const ThreeBusComparison& cmp) {
    out << "model,line,label,end,position_km,current_a,limit_a\n";
    for (const CurrentProfile* p : {&cmp.aropf, &cmp.ropf, &cmp.no_shunt}) {
        for (const auto& r : p->rows) {
            out << p->model << ',' << r.line << ',' << r.label << ",top," << fmt(r.pos_top_km) << ',' << fmt(r.top_a)
                << ',' << fmt(p->limit_a) << '\n';
            out << p->model << ',' << r.line << ',' << r.label << ",bottom," << fmt(r.pos_bot_km) << ','
                << fmt(r.bottom_a) << ',' << fmt(p->limit_a) << '\n';
        }
    }
}

// --- condition sweep -------------------------------------------------------

SweepSettings sweep_settings_of(const RadialGrid& grid) {
    SweepSettings s;
    s.k_lo = hint_number(grid, "sweep_k_min", s.k_lo);
    s.k_hi = hint_number(grid, "sweep_k_max", s.k_hi);
    s.pmax = pmax_rule_of(grid);
    return s;
}

SweepPoint evaluate_sweep_point(const RadialGrid& grid, SweepRule rule, double k, PmaxRule pmax) {
    SweepPoint pt;
    pt.k = k;
    pt.axis_mw = sweep_axis_mw(grid, rule, k);
    const RadialGrid g = scale_injection(grid, rule, k);
    const double inf = std::numeric_limits<double>::infinity();
    OperatingBounds bounds;
    try {
        bounds = default_bounds(g, pmax);
    } catch (const LoadFlowError&) {
        // no operating point to derive flow limits from: count as a C1 failure
        pt.report.c1_norm = pt.report.c2_norm = inf;
        pt.report.eta1 = pt.report.eta2 = pt.report.eta5 = pt.report.eta = inf;
        pt.max_vbar = std::numeric_limits<double>::quiet_NaN();
        return pt;
    }
    pt.report = evaluate_conditions(g, bounds);
    pt.max_vbar = std::numeric_limits<double>::quiet_NaN();
    if (pt.report.c1()) {
        const GridMatrices m = build_matrices(g, bounds);
        const VectorXd vb = auxiliary_voltage(g, m, bounds.p_min, bounds.q_min);
        pt.max_vbar = std::sqrt(vb.maxCoeff());
    }
    return pt;
}

SweepResult sweep_conditions(const RadialGrid& grid, SweepRule rule, const SweepSettings& st) {
    if (!(st.k_hi > st.k_lo) || st.grid_points < 2) throw std::invalid_argument("empty sweep range");
    SweepResult res;
    res.rule = rule;
    int fail = -1;
    for (int i = 0; i < st.grid_points; ++i) {
        const double k = st.k_lo + (st.k_hi - st.k_lo) * i / (st.grid_points - 1);
        res.points.push_back(evaluate_sweep_point(grid, rule, k, st.pmax));
        if (!res.points.back().report.holds) {
            fail = i;
            break;
        }
    }
    if (fail < 0) {
        res.last_holding = res.points.back();
        return res;
    }
    res.violated = true;
    if (fail == 0) {
        res.first_failing = res.points[0];
        res.first_condition = res.first_failing.report.first_failure();
        return res;
    }
    SweepPoint lo = res.points[fail - 1], hi = res.points[fail];
    const double width = st.rel_width * (st.k_hi - st.k_lo);
    while (hi.k - lo.k > width) {
        SweepPoint mid = evaluate_sweep_point(grid, rule, 0.5 * (lo.k + hi.k), st.pmax);
        res.points.push_back(mid);
        (mid.report.holds ? lo : hi) = mid;
    }
    std::sort(res.points.begin(), res.points.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.k < b.k; });
    res.last_holding = lo;
    res.first_failing = hi;
    res.first_condition = hi.report.first_failure();
    return res;
}

void write_sweep_csv(std::ostream& out, const SweepResult& res) {
    out << "k,axis_mw,c1_norm,c2_norm,eta5,eta1,eta2,holds,first_failure,max_vbar_pu\n";
    for (const auto& p : res.points) {
        const auto& r = p.report;
        out << fmt(p.k) << ',' << fmt(p.axis_mw) << ',' << fmt(r.c1_norm) << ',' << fmt(r.c2_norm) << ','
            << fmt(r.eta5) << ',' << fmt(r.eta1) << ',' << fmt(r.eta2) << ',' << (r.holds ? 1 : 0) << ','
            << r.first_failure() << ',' << fmt(p.max_vbar) << '\n';
    }
}

// --- compression -----------------------------------------------------------

CompressionMode parse_compression_mode(const std::string& s) {
    if (s == "voltage") return CompressionMode::Voltage;
    if (s == "ampacity") return CompressionMode::Ampacity;
    throw ValidationError("unknown compression mode '" + s + "' (expected voltage or ampacity)");
}

std::string to_string(CompressionMode m) { return m == CompressionMode::Voltage ? "voltage" : "ampacity"; }

CompressionSettings compression_settings_of(const RadialGrid& grid) {
    CompressionSettings s;
    s.k_lo = hint_number(grid, "compress_k_min", s.k_lo);
    s.k_hi = hint_number(grid, "compress_k_max", s.k_hi);
    return s;
}

namespace {

struct CompressionProbe {
    RadialGrid fixed;
    std::vector<cplx> s;
    OpfSolution sol;
    bool feasible = false;
};

CompressionProbe probe(const RadialGrid& grid, CompressionMode mode, SweepRule rule, double k,
                       const CompressionSettings& st) {
    CompressionProbe pr;
    const RadialGrid g = scale_injection(grid, rule, k);
    pr.s = min_injection(g);
    pr.fixed = fix_injection(g, pr.s);
    OperatingBounds bounds;
    if (st.lift_caps) {
        const double big = 1e3;
        bounds.P_max = VectorXd::Constant(grid.size(), big);
        bounds.Q_max = VectorXd::Constant(grid.size(), big);
        bounds.v_min = grid.v_min;
        bounds.v_max = grid.v_max;
    } else {
        try {
            bounds = default_bounds(g, pmax_rule_of(grid));
        } catch (const LoadFlowError&) {
            return pr;
        }
    }
    ArOpfOptions opts;
    opts.voltage_limits = mode == CompressionMode::Voltage;
    opts.ampacity_limits = mode == CompressionMode::Ampacity;
    pr.sol = solve(build_ar_opf(pr.fixed, bounds, CostModel::import_only(), opts));
    pr.feasible = pr.sol.status == SolverStatus::Optimal;
    return pr;
}

}  // namespace

CompressionResult quantify_compression(const RadialGrid& grid, CompressionMode mode, SweepRule rule,
                                       const CompressionSettings& st) {
    CompressionResult res;
    res.mode = mode;
    double lo = st.k_lo, hi = st.k_hi;
    CompressionProbe best = probe(grid, mode, rule, lo, st);
    // Pure load can violate v_min on long feeders; move to the first feasible k on a coarse grid.
    for (int i = 1; i <= 40 && !best.feasible; ++i) {
        lo = st.k_lo + (st.k_hi - st.k_lo) * i / 40.0;
        best = probe(grid, mode, rule, lo, st);
    }
    if (!best.feasible) throw std::runtime_error("compression: no feasible injection in the search range");
    for (int i = 0; i < 8 && probe(grid, mode, rule, hi, st).feasible; ++i) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > st.rel_tol * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        (probe(grid, mode, rule, mid, st).feasible ? lo : hi) = mid;
    }
    best = probe(grid, mode, rule, lo, st);
    res.k = lo;
    res.axis_mw = sweep_axis_mw(grid, rule, lo);

    const RadialGrid& g = best.fixed;
    const OpfVariables& x = best.sol.vars;
    const LoadFlowState lf = solve_loadflow(g, best.s);
    const int L = g.size();
    double best_aux = -1.0;

    if (mode == CompressionMode::Voltage) {
        for (int k = 0; k < L; ++k) {
            CompressionRow row;
            row.id = k + 1;
            row.label = g.labels[k + 1];
            row.auxiliary = std::sqrt(x.v_bar[k]);
            row.original = std::sqrt(lf.v[k]);
            row.gap = row.auxiliary - row.original;
            res.rows.push_back(row);
            if (x.v_bar[k] > best_aux) {
                best_aux = x.v_bar[k];
                res.at_binding = row;
            }
        }
        res.binding = std::sqrt(g.v_max) - std::sqrt(best_aux) <= st.binding_tol;
    } else {
        const auto ch = g.children();
        for (int k = 0; k < L; ++k) {
            const Line& ln = g.lines[k];
            double Phb = x.p[k], Qhb = x.q[k], Pbb = x.p[k], Qbb = x.q[k];
            for (int c : ch[k]) {
                Phb += x.P_hat[c];
                Qhb += x.Q_hat[c];
                Pbb += x.P_bar[c];
                Qbb += x.Q_bar[c];
            }
            const double Pb = lf.S_bot[k].real(), Qb = lf.S_bot[k].imag();
            const double vu = up_value(g, x.v, k);
            const double lf_vu = lf.v_up(g, k);
            const double aux_bot = (std::max(Phb * Phb, Pbb * Pbb) + std::max(Qhb * Qhb, Qbb * Qbb)) / (ln.i_max_sq * x.v[k]);
            const double aux_top = (std::max(std::pow(x.P_hat[k], 2), std::pow(x.P_bar[k], 2)) +
                                    std::max(std::pow(x.Q_hat[k], 2), std::pow(x.Q_bar[k], 2))) /
                                   (ln.i_max_sq * vu);
            const double org_bot = (Pb * Pb + Qb * Qb) / (ln.i_max_sq * lf.v[k]);
            const double org_top = std::norm(lf.S_top[k]) / (ln.i_max_sq * lf_vu);
            for (int end = 0; end < 2; ++end) {
                CompressionRow row;
                row.id = k + 1;
                row.label = g.labels[k + 1];
                row.end = end == 0 ? "top" : "bottom";
                const double a = end == 0 ? aux_top : aux_bot;
                row.auxiliary = std::sqrt(a);
                row.original = std::sqrt(end == 0 ? org_top : org_bot);
                row.gap = row.auxiliary - row.original;
                res.rows.push_back(row);
                if (a > best_aux) {
                    best_aux = a;
                    res.at_binding = row;
                }
            }
        }
        res.binding = 1.0 - std::sqrt(best_aux) <= st.binding_tol;
    }
    res.max_gap = -std::numeric_limits<double>::infinity();
    for (const auto& r : res.rows) res.max_gap = std::max(res.max_gap, r.gap);
    return res;
}

void write_compression_csv(std::ostream& out, const CompressionResult& res) {
    out << "mode,id,label,end,auxiliary_pu,original_pu,gap_pu,binding\n";
    for (const auto& r : res.rows) {
        const bool b = r.id == res.at_binding.id && r.end == res.at_binding.end;
        out << to_string(res.mode) << ',' << r.id << ',' << r.label << ',' << r.end << ',' << fmt(r.auxiliary) << ','
            << fmt(r.original) << ',' << fmt(r.gap) << ',' << (b ? 1 : 0) << '\n';
    }
}

}  // namespace aropf
