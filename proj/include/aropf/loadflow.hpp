#pragma once

#include <complex>
#include <string>
#include <vector>

#include "aropf/network.hpp"

namespace aropf {

using cplx = std::complex<double>;

struct LoadFlowState {
    std::vector<cplx> S_top;  // per line, at the upstream end
    std::vector<cplx> S_bot;  // per line, at bus l
    std::vector<double> v;    // per bus 1..L (squared magnitude)
    std::vector<double> f;    // per line, squared current of the series element
    double residual = 0.0;    // max violation over the four power-flow equation families
    int iterations = 0;

    double v_up(const RadialGrid& grid, int k) const {
        int u = grid.up_index(k);
        return u < 0 ? grid.v0 : v[u];
    }
};

struct LoadFlowOptions {
    double tol = 1e-10;
    int max_iter = 500;
};

// Backward-forward sweep from a flat start at v0. Throws LoadFlowError.
LoadFlowState solve_loadflow(const RadialGrid& grid, const std::vector<cplx>& s, const LoadFlowOptions& opts = {});

// Max violation of the flow equations for an arbitrary point (s, S_top, v, f).
double flow_residual(const RadialGrid& grid, const std::vector<cplx>& s, const std::vector<cplx>& S_top,
                     const std::vector<double>& v, const std::vector<double>& f);

struct TerminalCurrents {
    std::vector<double> top_sq;     // |S_top|^2 / v_up
    std::vector<double> bottom_sq;  // |S_bot|^2 / v
};
TerminalCurrents terminal_currents(const LoadFlowState& state, const RadialGrid& grid);

struct Violation {
    enum class Kind { UnderVoltage, OverVoltage, AmpacityTop, AmpacityBottom };
    Kind kind;
    int id;  // bus or line label 1..L
    double value, limit;
    std::string describe() const;
};
// Closed bounds; a value counts as violating only when it exceeds the limit by more than tol.
std::vector<Violation> check_operational(const LoadFlowState& state, const RadialGrid& grid, double tol = 1e-8);

}  // namespace aropf
