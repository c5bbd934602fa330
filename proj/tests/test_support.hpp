#pragma once

// Shared fixtures for unit, property and acceptance tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "aropf/bench.hpp"
#include "aropf/conditions.hpp"
#include "aropf/keyvalue.hpp"
#include "aropf/loadflow.hpp"
#include "aropf/matrices.hpp"
#include "aropf/network.hpp"
#include "aropf/opf.hpp"
#include "aropf/recovery.hpp"

namespace aropf::testing {

inline RadialGrid bundled(const std::string& name) { return load_grid(resolve_grid_path(name)); }

inline CostModel threebus_cost(const RadialGrid& grid) {
    return parse_cost(read_text_file(std::string(AROPF_DATA_DIR) + "/threebus.cost"), grid);
}

// Chain or branching grid with unit labels; bounds are boxes.
inline RadialGrid make_grid(const std::vector<int>& up, double r, double x, double b) {
    RadialGrid g;
    g.name = "synthetic";
    g.v0 = 1.0;
    g.v_min = 0.81;
    g.v_max = 1.21;
    const int L = static_cast<int>(up.size());
    g.labels.push_back("0");
    for (int l = 1; l <= L; ++l) {
        Line ln;
        ln.id = l;
        ln.up = up[l - 1];
        ln.r = r;
        ln.x = x;
        ln.b = b;
        ln.i_max_sq = 4.0;
        g.lines.push_back(ln);
        Bus bus;
        bus.id = l;
        g.buses.push_back(bus);
        g.labels.push_back(std::to_string(l));
    }
    return g;
}

// Random radial grid with L <= max_lines on which C1-C5 hold under the 110 % flow rule.
// Loads and generators are boxes around small per-unit values.
class RandomGrids {
public:
    explicit RandomGrids(unsigned seed) : rng_(seed) {}

    RadialGrid next(int max_lines = 15) {
        for (;;) {
            RadialGrid g = draw(max_lines);
            GridOptions opts;
            opts.allow_zero_shunt = true;
            try {
                validate(g, opts);
                if (evaluate_conditions(g, default_bounds(g)).holds) return g;
            } catch (const std::exception&) {
            }
        }
    }

    std::mt19937& rng() { return rng_; }

private:
    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    RadialGrid draw(int max_lines) {
        const int L = std::uniform_int_distribution<int>(1, max_lines)(rng_);
        std::vector<int> up(L, 0);
        for (int l = 2; l <= L; ++l) up[l - 1] = std::uniform_int_distribution<int>(1, l - 1)(rng_);
        RadialGrid g = make_grid(up, 0.0, 0.0, 0.0);
        for (auto& ln : g.lines) {
            ln.r = uni(0.002, 0.03);
            ln.x = uni(0.002, 0.03);
            ln.b = uni(1e-4, 2e-3);
            ln.i_max_sq = uni(1.0, 4.0);
        }
        for (auto& bus : g.buses) {
            bus.p_max = uni(0.0, 0.08);
            bus.p_min = bus.p_max - uni(0.0, 0.12);
            bus.q_max = uni(0.0, 0.04);
            bus.q_min = bus.q_max - uni(0.0, 0.05);
        }
        return g;
    }

    std::mt19937 rng_;
};

// Random linear bus costs that keep the import cost dominant.
inline CostModel random_cost(std::mt19937& rng, const RadialGrid& g) {
    CostModel c = CostModel::import_only(std::uniform_real_distribution<double>(1.0, 3.0)(rng));
    c.bus.resize(g.size());
    for (auto& b : c.bus) b.lin_p = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    return c;
}

// One pass over the randomized property set: feasible AR-OPF solves on random grids,
// then recovery from the same solutions with losses inflated on a random subset of lines.
struct PropertyStats {
    int solves = 0;                 // feasible AR-OPF solves used
    int attempts = 0;               // grids drawn, including infeasible ones
    double sandwich_worst = 0.0;      // largest violation of the auxiliary sandwich
    int recoveries = 0, converged = 0;
    int envelope_checks = 0, envelope_violations = 0;
    std::string first_violation;
    double oracle_worst = 0.0;      // recovered point vs independent load flow
    int strict_runs = 0;            // runs whose input had strict cone inequality
    double p1_margin_min = 1e300;   // smallest P1_input - P1_recovered over those runs
    std::vector<std::string> failures;
};

inline double sandwich_violation(const OpfVariables& x) {
    double w = 0.0;
    for (Eigen::Index k = 0; k < x.f.size(); ++k) {
        w = std::max({w, x.f[k] - x.f_bar[k], x.v[k] - x.v_bar[k], x.P_hat[k] - x.P[k], x.P[k] - x.P_bar[k],
                      x.Q_hat[k] - x.Q[k], x.Q[k] - x.Q_bar[k]});
    }
    return w;
}

inline PropertyStats run_property_set(unsigned seed, int count = 50, int max_lines = 15) {
    PropertyStats st;
    RandomGrids gen(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    while (st.solves < count && st.attempts < 20 * count) {
        ++st.attempts;
        const RadialGrid g = gen.next(max_lines);
        const OperatingBounds bd = default_bounds(g);
        const GridMatrices m = build_matrices(g, bd);
        const ConditionReport cond = check_all(g, m);
        const OpfSolution sol = solve(build_ar_opf(g, bd, random_cost(gen.rng(), g)));
        if (sol.status != SolverStatus::Optimal) continue;
        ++st.solves;
        st.sandwich_worst = std::max(st.sandwich_worst, sandwich_violation(sol.vars));

        const int L = g.size();
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(L);
        const int forced = std::uniform_int_distribution<int>(0, L - 1)(gen.rng());
        for (int k = 0; k < L; ++k)
            if (k == forced || U(gen.rng()) < 0.3) delta[k] = (0.5 + 1.5 * U(gen.rng())) * (sol.vars.f[k] + 1e-3);
        const OpfVariables in = inflate_losses(sol.vars, g, m, delta);
        ++st.recoveries;
        try {
            const RecoveryTrace tr = recover(in, g, m);
            if (!tr.converged) {
                st.failures.push_back("no convergence on draw " + std::to_string(st.attempts));
                continue;
            }
            ++st.converged;
            const EnvelopeReport env = check_recovery_envelope(tr, g, m, cond.eta);
            st.envelope_checks += env.checks;
            st.envelope_violations += static_cast<int>(env.violations.size());
            if (!env.ok() && st.first_violation.empty()) {
                const auto& v = env.violations.front();
                st.first_violation = v.family + " at n=" + std::to_string(v.n) + " line " + std::to_string(v.line);
            }
            const RecoveryCheck th = verify_recovery(tr, g);
            st.oracle_worst = std::max(st.oracle_worst, th.oracle_converged ? th.oracle_distance : 1e300);
            if (th.had_strict) {
                ++st.strict_runs;
                st.p1_margin_min = std::min(st.p1_margin_min, th.P1_input - th.P1_recovered);
            }
        } catch (const std::exception& e) {
            st.failures.push_back(std::string("draw ") + std::to_string(st.attempts) + ": " + e.what());
        }
    }
    return st;
}

}  // namespace aropf::testing
