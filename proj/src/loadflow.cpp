#include "aropf/loadflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aropf/errors.hpp"

namespace aropf {

namespace {

// Sum of S_top over the children of each line, in a single pass.
std::vector<cplx> child_sums(const RadialGrid& grid, const std::vector<cplx>& S_top) {
    std::vector<cplx> acc(grid.size(), cplx{});
    for (int k = 0; k < grid.size(); ++k)
        if (int u = grid.up_index(k); u >= 0) acc[u] += S_top[k];
    return acc;
}

}  // namespace

LoadFlowState solve_loadflow(const RadialGrid& grid, const std::vector<cplx>& s, const LoadFlowOptions& opts) {
    const int L = grid.size();
    if (static_cast<int>(s.size()) != L) throw std::invalid_argument("injection vector size differs from bus count");
    LoadFlowState st;
    st.S_top.assign(L, cplx{});
    st.S_bot.assign(L, cplx{});
    st.v.assign(L, grid.v0);
    st.f.assign(L, 0.0);

    double damping = 1.0;
    double prev_delta = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        // backward: children have larger labels than their parent
        std::vector<cplx> downstream(L, cplx{});
        for (int k = L - 1; k >= 0; --k) {
            const Line& ln = grid.lines[k];
            const double vl = st.v[k];
            const double vu = st.v_up(grid, k);
            st.S_bot[k] = s[k] + downstream[k];
            const cplx series = st.S_bot[k] - cplx(0.0, vl * ln.b);
            st.f[k] = std::norm(series) / vl;
            st.S_top[k] = st.S_bot[k] + cplx(ln.r, ln.x) * st.f[k] - cplx(0.0, (vu + vl) * ln.b);
            if (int u = grid.up_index(k); u >= 0) downstream[u] += st.S_top[k];
        }
        // forward
        double delta = 0.0;
        for (int k = 0; k < L; ++k) {
            const Line& ln = grid.lines[k];
            const double vu = st.v_up(grid, k);
            const double target = vu - 2.0 * (ln.r * st.S_top[k].real() + ln.x * (st.S_top[k].imag() + vu * ln.b)) +
                                  (ln.r * ln.r + ln.x * ln.x) * st.f[k];
            const double next = st.v[k] + damping * (target - st.v[k]);
            if (!(next > 0.0))
                throw LoadFlowError(LoadFlowError::Kind::VoltageCollapse,
                                    "voltage collapse at bus " + std::to_string(k + 1) + " (iteration " +
                                        std::to_string(it) + ")");
            delta = std::max(delta, std::abs(next - st.v[k]));
            st.v[k] = next;
        }
        st.iterations = it;
        if (delta > prev_delta) {
            if (++growth >= 3 && damping > 0.1) {
                damping *= 0.5;
                growth = 0;
            }
        } else {
            growth = 0;
        }
        prev_delta = delta;
        if (delta <= 1e-3 * opts.tol) {
            // one more backward pass so the flows match the final voltages
            std::vector<cplx> down(L, cplx{});
            for (int k = L - 1; k >= 0; --k) {
                const Line& ln = grid.lines[k];
                const double vl = st.v[k], vu = st.v_up(grid, k);
                st.S_bot[k] = s[k] + down[k];
                st.f[k] = std::norm(st.S_bot[k] - cplx(0.0, vl * ln.b)) / vl;
                st.S_top[k] = st.S_bot[k] + cplx(ln.r, ln.x) * st.f[k] - cplx(0.0, (vu + vl) * ln.b);
                if (int u = grid.up_index(k); u >= 0) down[u] += st.S_top[k];
            }
            st.residual = flow_residual(grid, s, st.S_top, st.v, st.f);
            if (st.residual <= opts.tol) return st;
        }
    }
    st.residual = flow_residual(grid, s, st.S_top, st.v, st.f);
    if (st.residual <= opts.tol) return st;
    throw LoadFlowError(LoadFlowError::Kind::NonConvergence,
                        "load flow did not converge in " + std::to_string(opts.max_iter) +
                            " iterations (residual " + std::to_string(st.residual) + ")");
}

double flow_residual(const RadialGrid& grid, const std::vector<cplx>& s, const std::vector<cplx>& S_top,
                     const std::vector<double>& v, const std::vector<double>& f) {
    const int L = grid.size();
    const std::vector<cplx> down = child_sums(grid, S_top);
    double res = 0.0;
    for (int k = 0; k < L; ++k) {
        const Line& ln = grid.lines[k];
        const int u = grid.up_index(k);
        const double vu = u < 0 ? grid.v0 : v[u];
        const cplx Sb = s[k] + down[k];
        const cplx expect_top = Sb + cplx(ln.r, ln.x) * f[k] - cplx(0.0, (vu + v[k]) * ln.b);
        res = std::max(res, std::abs(S_top[k].real() - expect_top.real()));
        res = std::max(res, std::abs(S_top[k].imag() - expect_top.imag()));
        const double vexp = vu - 2.0 * (ln.r * S_top[k].real() + ln.x * (S_top[k].imag() + vu * ln.b)) +
                            (ln.r * ln.r + ln.x * ln.x) * f[k];
        res = std::max(res, std::abs(v[k] - vexp));
        const double fexp = std::norm(S_top[k] + cplx(0.0, vu * ln.b)) / vu;
        res = std::max(res, std::abs(f[k] - fexp));
    }
    return res;
}

TerminalCurrents terminal_currents(const LoadFlowState& state, const RadialGrid& grid) {
    TerminalCurrents tc;
    const int L = grid.size();
    tc.top_sq.resize(L);
    tc.bottom_sq.resize(L);
    for (int k = 0; k < L; ++k) {
        tc.top_sq[k] = std::norm(state.S_top[k]) / state.v_up(grid, k);
        tc.bottom_sq[k] = std::norm(state.S_bot[k]) / state.v[k];
    }
    return tc;
}

std::string Violation::describe() const {
    std::ostringstream ss;
    switch (kind) {
        case Kind::UnderVoltage: ss << "bus " << id << " v=" << value << " < v_min=" << limit; break;
        case Kind::OverVoltage: ss << "bus " << id << " v=" << value << " > v_max=" << limit; break;
        case Kind::AmpacityTop: ss << "line " << id << " top |I|^2=" << value << " > " << limit; break;
        case Kind::AmpacityBottom: ss << "line " << id << " bottom |I|^2=" << value << " > " << limit; break;
    }
    return ss.str();
}

std::vector<Violation> check_operational(const LoadFlowState& state, const RadialGrid& grid, double tol) {
    std::vector<Violation> out;
    const TerminalCurrents tc = terminal_currents(state, grid);
    for (int k = 0; k < grid.size(); ++k) {
        const int id = k + 1;
        if (state.v[k] < grid.v_min - tol) out.push_back({Violation::Kind::UnderVoltage, id, state.v[k], grid.v_min});
        if (state.v[k] > grid.v_max + tol) out.push_back({Violation::Kind::OverVoltage, id, state.v[k], grid.v_max});
        const double lim = grid.lines[k].i_max_sq;
        if (tc.top_sq[k] > lim + tol) out.push_back({Violation::Kind::AmpacityTop, id, tc.top_sq[k], lim});
        if (tc.bottom_sq[k] > lim + tol) out.push_back({Violation::Kind::AmpacityBottom, id, tc.bottom_sq[k], lim});
    }
    return out;
}

}  // namespace aropf
