#pragma once

// Experiment drivers: 3-bus current profiles, condition sweeps under growing injection,
// and the compression of the feasible set at the first binding voltage/ampacity limit.

#include <iosfwd>
#include <string>
#include <vector>

#include "aropf/conditions.hpp"
#include "aropf/matrices.hpp"
#include "aropf/opf.hpp"

namespace aropf {

// How a scalar k grows the active injection. Both keep q_min from the file.
//   LoadShare:  p_min = (1 - k) p_max, i.e. a production of k times the total load spread
//               over the buses in proportion to their load. Axis: net injection in MW.
//   Capability: p_min = p_max - k (p_max - p_min_file), i.e. every generator at k times its
//               rated output. Axis: total production in MW.
enum class SweepRule { LoadShare, Capability };
SweepRule parse_sweep_rule(const std::string& s);
std::string to_string(SweepRule r);

// Rule and search ranges come from the grid's [bench] hints when present.
SweepRule sweep_rule_of(const RadialGrid& grid);
PmaxRule pmax_rule_of(const RadialGrid& grid);
PmaxRule parse_pmax_rule(const std::string& s);

// Copy of the grid with p_min moved according to the rule.
RadialGrid scale_injection(const RadialGrid& grid, SweepRule rule, double k);
double sweep_axis_mw(const RadialGrid& grid, SweepRule rule, double k);
// Copy of the grid whose injection set is the single point s.
RadialGrid fix_injection(const RadialGrid& grid, const std::vector<cplx>& s);
// Injection at the low end of the (scaled) bounds: (p_min, q_min).
std::vector<cplx> min_injection(const RadialGrid& grid);

// --- 3-bus comparison ------------------------------------------------------

struct TerminalCurrentRow {
    int line = 0;
    std::string label;
    double pos_top_km = 0.0, pos_bot_km = 0.0;
    double top_a = 0.0, bottom_a = 0.0;
};

struct CurrentProfile {
    std::string model;  // "aropf", "ropf", "aropf-no-shunt"
    SolverStatus status = SolverStatus::NumericalFailure;
    double objective = 0.0;
    double seconds = 0.0;      // solve plus recovery plus load flow
    double max_gap = 0.0;      // largest exactness gap of the relaxed solution
    bool recovered = false;    // iterative recovery applied before the load flow
    double limit_a = 0.0;      // smallest line ampacity in amperes
    std::vector<cplx> s;       // injections fed to the load flow
    std::vector<TerminalCurrentRow> rows;
    std::string note;

    double max_current_a() const;
};

struct ThreeBusComparison {
    CurrentProfile aropf, ropf, no_shunt;
};

// Solves the three models on the grid, passes each injection vector through the load
// flow of the real grid and reports terminal currents in amperes.
ThreeBusComparison run_threebus_comparison(const RadialGrid& grid, const CostModel& cost);

void write_threebus_csv(std::ostream& out, const ThreeBusComparison& cmp);

// --- condition sweep -------------------------------------------------------

struct SweepSettings {
    double k_lo = 0.0, k_hi = 10.0;
    int grid_points = 41;        // coarse scan before bisection
    double rel_width = 1e-3;     // final bracket relative to k_hi - k_lo
    PmaxRule pmax = PmaxRule::Pct110;
};
SweepSettings sweep_settings_of(const RadialGrid& grid);

struct SweepPoint {
    double k = 0.0;
    double axis_mw = 0.0;
    ConditionReport report;
    double max_vbar = 0.0;  // largest |V_bar| at (p_min, q_min), p.u. magnitude
};

struct SweepResult {
    SweepRule rule = SweepRule::LoadShare;
    std::vector<SweepPoint> points;  // increasing k
    bool violated = false;
    std::string first_condition;     // empty when nothing fails in range
    SweepPoint last_holding, first_failing;

    double threshold_mw() const { return last_holding.axis_mw; }
};

SweepPoint evaluate_sweep_point(const RadialGrid& grid, SweepRule rule, double k, PmaxRule pmax);
SweepResult sweep_conditions(const RadialGrid& grid, SweepRule rule, const SweepSettings& settings);

void write_sweep_csv(std::ostream& out, const SweepResult& res);

// --- compression -----------------------------------------------------------

enum class CompressionMode { Voltage, Ampacity };
CompressionMode parse_compression_mode(const std::string& s);
std::string to_string(CompressionMode m);

struct CompressionSettings {
    double k_lo = 0.0, k_hi = 20.0;
    double rel_tol = 1e-7;
    // Replace the P_max/Q_max caps by a large constant so that only the voltage or
    // ampacity rows can bind; the ties P <= P_bar, Q <= Q_bar stay.
    bool lift_caps = true;
    double binding_tol = 1e-6;
};
CompressionSettings compression_settings_of(const RadialGrid& grid);

struct CompressionRow {
    int id = 0;  // bus label (voltage) or line label (ampacity)
    std::string label;
    std::string end;          // "", "top" or "bottom"
    double auxiliary = 0.0;   // |V_bar| or auxiliary current / ampacity
    double original = 0.0;    // |V| or load-flow current / ampacity
    double gap = 0.0;
};

struct CompressionResult {
    CompressionMode mode = CompressionMode::Voltage;
    double k = 0.0, axis_mw = 0.0;
    bool binding = false;
    CompressionRow at_binding;
    double max_gap = 0.0;
    std::vector<CompressionRow> rows;

    double gap() const { return at_binding.gap; }
};

// Grows the injection until AR-OPF with only the chosen limit family turns infeasible,
// then compares the auxiliary quantity at the binding constraint with the load flow.
CompressionResult quantify_compression(const RadialGrid& grid, CompressionMode mode, SweepRule rule,
                                       const CompressionSettings& settings);

void write_compression_csv(std::ostream& out, const CompressionResult& res);

}  // namespace aropf
