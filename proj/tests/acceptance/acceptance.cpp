// One PASS/FAIL line per acceptance criterion; exit status 1 when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "test_support.hpp"

using namespace aropf;
using namespace aropf::testing;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
        pass = pass && ok;
    }
};

std::string num(double x, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

// Data shared by the property criteria.
const PropertyStats& property_stats() {
    static const PropertyStats st = run_property_set(20261019u, 50);
    return st;
}

Verdict threebus_exactness() {
    Verdict v;
    const RadialGrid g = bundled("threebus");
    const ThreeBusComparison cmp = run_threebus_comparison(g, threebus_cost(g));
    const CurrentProfile& a = cmp.aropf;
    v.require(a.status == SolverStatus::Optimal, "AR-OPF " + to_string(a.status));
    v.require(a.max_gap <= 1e-6, "max gap " + num(a.max_gap, 3) + " <= 1e-6");
    v.require(a.max_current_a() <= 120.0, "max current " + num(a.max_current_a()) + " A <= 120 A");
    v.require(a.seconds < 1.0, "runtime " + num(a.seconds * 1e3, 3) + " ms < 1 s");
    return v;
}

Verdict relaxation_failures() {
    Verdict v;
    const RadialGrid g = bundled("threebus");
    const ThreeBusComparison cmp = run_threebus_comparison(g, threebus_cost(g));
    for (const CurrentProfile* p : {&cmp.ropf, &cmp.no_shunt}) {
        const double over = (p->max_current_a() / 120.0 - 1.0) * 100.0;
        v.require(p->status == SolverStatus::Optimal && over > 5.0,
                  p->model + " max " + num(p->max_current_a()) + " A (" + num(over, 3) + " % over, need > 5 %)");
    }
    return v;
}

Verdict base_conditions() {
    Verdict v;
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        const RadialGrid g = bundled(name);
        const ConditionReport r = check_all(g, build_matrices(g, default_bounds(g, pmax_rule_of(g))));
        v.require(r.holds && r.eta < 0.5, std::string(name) + " eta " + num(r.eta, 4));
    }
    return v;
}

Verdict sweep(const char* name, double target_mw, double target_v, double max_seconds) {
    Verdict v;
    const RadialGrid g = bundled(name);
    const auto t0 = Clock::now();
    const SweepResult res = sweep_conditions(g, sweep_rule_of(g), sweep_settings_of(g));
    const double secs = seconds_since(t0);
    v.require(res.violated && res.first_condition == "C3", "first violation " + res.first_condition);
    const double mw = res.threshold_mw();
    v.require(within(mw, target_mw, 0.25 * target_mw),
              "threshold " + num(mw, 4) + " MW vs " + num(target_mw) + " +-25 %");
    v.require(within(res.last_holding.max_vbar, target_v, 0.015),
              "max |V_bar| " + num(res.last_holding.max_vbar, 5) + " vs " + num(target_v) + " +-0.015");
    if (max_seconds > 0) v.require(secs < max_seconds, "runtime " + num(secs, 3) + " s");
    return v;
}

Verdict compression() {
    Verdict v;
    for (const char* name : {"ieee34", "cigre_mv"}) {
        const RadialGrid g = bundled(name);
        const std::string tag = name;
        const CompressionSettings st = compression_settings_of(g);
        const CompressionResult vol = quantify_compression(g, CompressionMode::Voltage, sweep_rule_of(g), st);
        const double vmax_gap = tag == "ieee34" ? 0.005 : 0.01;
        v.require(vol.binding && vol.gap() >= 0 && vol.gap() <= vmax_gap,
                  tag + " voltage gap " + num(vol.gap(), 3) + " at bus " + vol.at_binding.label + " <= " + num(vmax_gap));
        const CompressionResult amp = quantify_compression(g, CompressionMode::Ampacity, sweep_rule_of(g), st);
        const double pct = (amp.at_binding.auxiliary - amp.at_binding.original) / amp.at_binding.auxiliary * 100.0;
        const double lo = tag == "ieee34" ? 4.0 : 5.0;
        v.require(amp.binding && pct >= lo && pct <= 15.0,
                  tag + " ampacity gap " + num(pct, 3) + " % at line " + amp.at_binding.label + " " + amp.at_binding.end +
                      " in [" + num(lo) + ", 15]");
    }
    return v;
}

Verdict auxiliary_sandwich() {
    Verdict v;
    const PropertyStats& st = property_stats();
    v.require(st.solves == 50, num(st.solves) + " feasible solves of " + num(st.attempts) + " draws");
    v.require(st.sandwich_worst <= 1e-8, "worst sandwich violation " + num(st.sandwich_worst, 3));
    return v;
}

Verdict envelope() {
    Verdict v;
    const PropertyStats& st = property_stats();
    v.require(st.recoveries == 50 && st.converged == st.recoveries && st.failures.empty(),
              num(st.converged) + "/" + num(st.recoveries) + " recoveries converged");
    v.require(st.envelope_violations == 0,
              num(st.envelope_checks) + " envelope inequalities, " + num(st.envelope_violations) + " violated" +
                  (st.first_violation.empty() ? "" : " (first " + st.first_violation + ")"));
    v.require(st.oracle_worst <= 1e-8, "worst oracle distance " + num(st.oracle_worst, 3));
    return v;
}

Verdict matrix_identities() {
    Verdict v;
    for (const char* name : {"threebus", "ieee34", "cigre_mv"}) {
        const RadialGrid g = bundled(name);
        const GridMatrices m = build_matrices(g, default_bounds(g, pmax_rule_of(g)));
        const int L = g.size();
        const MatrixXd I = MatrixXd::Identity(L, L);
        const double e39 =
            (m.G * g.b().asDiagonal() * m.G.transpose() - MatrixXd(m.B.asDiagonal()) + MatrixXd(g.b().asDiagonal()))
                .cwiseAbs()
                .maxCoeff();
        const double inv = ((I - m.G.transpose() - m.M) * m.C - I).cwiseAbs().maxCoeff();
        const MatrixXd A = m.H.transpose() * m.M;
        MatrixXd term = I, sum = I;
        for (int n = 1; n < 20; ++n) {
            term = term * A;
            sum += term;
        }
        const double a = A.norm();
        const double tail = std::pow(a, 20) / (1 - a) * m.H.norm() + 1e-14 * m.C.norm();
        const double neu = (sum * m.H.transpose() - m.C).norm();
        v.require(e39 <= 1e-14 && inv <= 1e-12 && neu <= tail, std::string(name) + " incidence " + num(e39, 2) +
                                                                   ", inverse " + num(inv, 2) + ", series " + num(neu, 2) +
                                                                   " (bound " + num(tail, 2) + ")");
    }
    return v;
}

Verdict import_decrease() {
    Verdict v;
    const PropertyStats& st = property_stats();
    v.require(st.strict_runs > 0 && st.p1_margin_min > 1e-10,
              num(st.strict_runs) + " random runs with strict lines, min P1 decrease " + num(st.p1_margin_min, 3));
    // the 3-bus optimum with inflated losses on each line
    const RadialGrid g = bundled("threebus");
    const OperatingBounds bd = default_bounds(g);
    const GridMatrices m = build_matrices(g, bd);
    const OpfSolution sol = solve(build_ar_opf(g, bd, threebus_cost(g)));
    double worst = 1e300;
    int runs = 0;
    for (int k = 0; k < g.size(); ++k) {
        const RecoveryTrace tr = recover(inflate_losses(sol.vars, g, m, 0.05 * VectorXd::Unit(g.size(), k)), g, m);
        const RecoveryCheck th = verify_recovery(tr, g);
        if (!th.had_strict) continue;
        ++runs;
        worst = std::min(worst, th.P1_input - th.P1_recovered);
    }
    v.require(runs == g.size() && worst > 1e-10, "3-bus inflated runs " + num(runs) + ", min P1 decrease " + num(worst, 3));
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"3-bus exactness", threebus_exactness},
        {"relaxation failures", relaxation_failures},
        {"conditions at base load", base_conditions},
        {"IEEE-34 sweep", [] { return sweep("ieee34", 2.2, 1.073, 60.0); }},
        {"CIGRE sweep", [] { return sweep("cigre_mv", 18.01, 1.0857, 0.0); }},
        {"compression", compression},
        {"auxiliary sandwich", auxiliary_sandwich},
        {"recovery envelope", envelope},
        {"matrix identities", matrix_identities},
        {"import decrease", import_decrease},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failed += v.pass ? 0 : 1;
        std::printf("%s %2zu %-24s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed ? 1 : 0;
}
