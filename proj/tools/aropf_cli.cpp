#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aropf/bench.hpp"
#include "aropf/conditions.hpp"
#include "aropf/errors.hpp"
#include "aropf/keyvalue.hpp"
#include "aropf/loadflow.hpp"
#include "aropf/matrices.hpp"
#include "aropf/network.hpp"
#include "aropf/opf.hpp"
#include "aropf/recovery.hpp"
#include "aropf/solution_io.hpp"

using namespace aropf;
namespace fs = std::filesystem;

namespace {

GridOptions g_opts;

RadialGrid grid_arg(const std::string& name) { return load_grid(resolve_grid_path(name), g_opts); }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string fmt(double x, int prec = 10) {
    std::ostringstream s;
    s << std::setprecision(prec) << x;
    return s.str();
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j), 17);
        out << '\n';
    }
}

PmaxRule rule_or_hint(const std::string& opt, const RadialGrid& grid) {
    return opt.empty() ? pmax_rule_of(grid) : parse_pmax_rule(opt);
}

void print_report(std::ostream& out, const ConditionReport& r) {
    auto row = [&](const char* name, const char* what, double value, double limit, bool ok) {
        out << std::left << std::setw(4) << name << std::setw(34) << what << std::right << std::setw(14)
            << fmt(value, 6) << "  < " << std::setw(4) << limit << "  " << (ok ? "holds" : "FAILS") << '\n';
    };
    row("C1", "||H^T M||_F", r.c1_norm, 1, r.c1());
    row("C2", "||E||_F", r.c2_norm, 1, r.c2());
    row("C3", "eta5: D E <= eta5 D", r.eta5, 0.5, r.c3());
    row("C4", "eta1: (H diag(r) E) o H <= eta1 H diag(r)", r.eta1, 0.5, r.c4());
    row("C5", "eta2: H diag(r) E E <= eta2 H diag(r) E", r.eta2, 0.5, r.c5());
    out << "eta = " << fmt(r.eta, 6) << ", conditions " << (r.holds ? "hold" : "do not hold");
    if (!r.holds) out << " (first failure " << r.first_failure() << ")";
    out << '\n';
}

void print_state(std::ostream& out, const RadialGrid& grid, const LoadFlowState& st) {
    const TerminalCurrents tc = terminal_currents(st, grid);
    const double ib = grid.base.current_base();
    out << std::left << std::setw(8) << "line" << std::right << std::setw(13) << "P_top" << std::setw(13) << "Q_top"
        << std::setw(13) << "|V| bus" << std::setw(13) << "f" << std::setw(13) << "I_top [A]" << std::setw(13)
        << "I_bot [A]" << '\n';
    for (int k = 0; k < grid.size(); ++k) {
        out << std::left << std::setw(8) << grid.labels[k + 1] << std::right << std::setw(13) << fmt(st.S_top[k].real(), 6)
            << std::setw(13) << fmt(st.S_top[k].imag(), 6) << std::setw(13) << fmt(std::sqrt(st.v[k]), 7) << std::setw(13)
            << fmt(st.f[k], 6) << std::setw(13) << fmt(std::sqrt(tc.top_sq[k]) * ib, 6) << std::setw(13)
            << fmt(std::sqrt(tc.bottom_sq[k]) * ib, 6) << '\n';
    }
    out << "iterations " << st.iterations << ", residual " << fmt(st.residual, 3) << '\n';
}

void loadflow_csv(std::ostream& out, const RadialGrid& grid, const LoadFlowState& st) {
    const TerminalCurrents tc = terminal_currents(st, grid);
    const double ib = grid.base.current_base();
    std::vector<double> pos(grid.size(), 0.0);
    out << "line,label,end,position_km,current_pu,current_a,limit_a\n";
    for (int k : grid.topological_order()) {
        const Line& ln = grid.lines[k];
        const int u = grid.up_index(k);
        const double top = u < 0 ? 0.0 : pos[u];
        pos[k] = top + (ln.length_km > 0 ? ln.length_km : 1.0);
        const double lim = std::sqrt(ln.i_max_sq) * ib;
        out << k + 1 << ',' << grid.labels[k + 1] << ",top," << fmt(top) << ',' << fmt(std::sqrt(tc.top_sq[k])) << ','
            << fmt(std::sqrt(tc.top_sq[k]) * ib) << ',' << fmt(lim) << '\n';
        out << k + 1 << ',' << grid.labels[k + 1] << ",bottom," << fmt(pos[k]) << ','
            << fmt(std::sqrt(tc.bottom_sq[k])) << ',' << fmt(std::sqrt(tc.bottom_sq[k]) * ib) << ',' << fmt(lim) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AR-OPF toolkit: radial grid matrices, exactness conditions, load flow, conic OPF and recovery"};
    app.require_subcommand(1);
    app.add_flag("--allow-zero-shunt", g_opts.allow_zero_shunt, "Accept lines with b = 0");

    // matrices dump
    auto* mat = app.add_subcommand("matrices", "Matrix utilities");
    auto* dump = mat->add_subcommand("dump", "Write G, H, B, M, C, D, F, E and the bound vectors as CSV");
    mat->require_subcommand(1);
    std::string grid_name, out_dir, pmax_opt;
    dump->add_option("grid", grid_name, "Grid file or bundled name")->required();
    dump->add_option("--out", out_dir, "Directory for one CSV per matrix (default: stdout)");
    dump->add_option("--pmax-rule", pmax_opt, "pct110 or loadflow");

    // check-conditions
    auto* chk = app.add_subcommand("check-conditions", "Evaluate C1-C5");
    double scale = std::nan("");
    std::string csv_path;
    chk->add_option("grid", grid_name, "Grid file or bundled name")->required();
    chk->add_option("--scale", scale, "Injection multiplier k under the grid's sweep rule");
    chk->add_option("--pmax-rule", pmax_opt, "pct110 or loadflow");
    chk->add_option("--csv", csv_path, "Also write the report as CSV");

    // loadflow
    auto* lfc = app.add_subcommand("loadflow", "Exact load flow for fixed injections");
    std::string inj_path, verify_path;
    bool lf_csv = false;
    lfc->add_option("grid", grid_name, "Grid file or bundled name")->required();
    lfc->add_option("--injections", inj_path, "Injection file ([bus X] p, q)");
    lfc->add_flag("--csv", lf_csv, "Print per-line terminal currents as CSV");
    lfc->add_option("--verify", verify_path, "Solution file to compare against the load flow");

    // solve
    auto* sol = app.add_subcommand("solve", "Solve AR-OPF or R-OPF");
    std::string model = "aropf", cost_path, sol_out, cbf_out;
    bool no_shunt = false;
    sol->add_option("grid", grid_name, "Grid file or bundled name")->required();
    sol->add_option("--model", model, "aropf or ropf")->check(CLI::IsMember({"aropf", "ropf"}));
    sol->add_option("--cost", cost_path, "Cost file (default: import cost only)");
    sol->add_flag("--no-shunt", no_shunt, "Build the model with all b set to zero");
    sol->add_option("--out", sol_out, "Solution file to write");
    sol->add_option("--pmax-rule", pmax_opt, "pct110 or loadflow");
    sol->add_option("--cbf", cbf_out, "Also export the conic program in CBF format");

    // recover
    auto* rec = app.add_subcommand("recover", "Turn a relaxed solution into a load-flow solution");
    std::string sol_in, trace_path;
    rec->add_option("solution", sol_in, "Solution file from 'solve'")->required();
    rec->add_option("grid", grid_name, "Grid file or bundled name")->required();
    rec->add_option("--trace", trace_path, "Per-iteration CSV");
    rec->add_option("--out", sol_out, "Recovered solution file to write");
    rec->add_option("--pmax-rule", pmax_opt, "pct110 or loadflow");

    // bench
    auto* bench = app.add_subcommand("bench", "Experiments");
    bench->require_subcommand(1);
    auto* b3 = bench->add_subcommand("threebus", "AR-OPF, R-OPF and shunt-free AR-OPF currents on the 3-bus cable grid");
    std::string b3_grid = "threebus", b3_cost;
    b3->add_option("--grid", b3_grid, "Grid (default: bundled threebus)");
    b3->add_option("--cost", b3_cost, "Cost file (default: bundled threebus.cost)");
    b3->add_option("--csv", csv_path, "CSV output path (default: stdout)");
    auto* bsw = bench->add_subcommand("sweep", "Scale injections until a condition fails");
    double k_max = std::nan("");
    bsw->add_option("grid", grid_name, "Grid file or bundled name")->required();
    bsw->add_option("--k-max", k_max, "Upper end of the multiplier range");
    bsw->add_option("--pmax-rule", pmax_opt, "pct110 or loadflow");
    bsw->add_option("--csv", csv_path, "CSV output path (default: stdout)");
    auto* bcp = bench->add_subcommand("compress", "Gap between auxiliary and physical quantities at the first binding limit");
    std::string mode = "voltage";
    bcp->add_option("grid", grid_name, "Grid file or bundled name")->required();
    bcp->add_option("--mode", mode, "voltage or ampacity")->check(CLI::IsMember({"voltage", "ampacity"}));
    bcp->add_option("--csv", csv_path, "CSV output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (dump->parsed()) {
            const RadialGrid grid = grid_arg(grid_name);
            const OperatingBounds bounds = default_bounds(grid, rule_or_hint(pmax_opt, grid));
            const GridMatrices m = build_matrices(grid, bounds);
            const std::pair<const char*, Eigen::MatrixXd> mats[] = {
                {"G", m.G}, {"H", m.H}, {"B", m.B}, {"M", m.M}, {"C", m.C}, {"D", m.D},
                {"F", m.F}, {"E", m.E}, {"pi", m.pi}, {"rho", m.rho}, {"theta", m.theta}};
            if (!out_dir.empty()) fs::create_directories(out_dir);
            for (const auto& [name, mm] : mats) {
                if (out_dir.empty()) {
                    std::cout << "# " << name << '\n';
                    write_matrix_csv(std::cout, mm);
                } else {
                    auto out = open_out((fs::path(out_dir) / (std::string(name) + ".csv")).string());
                    write_matrix_csv(out, mm);
                }
            }
            return 0;
        }
        if (chk->parsed()) {
            RadialGrid grid = grid_arg(grid_name);
            if (!std::isnan(scale)) grid = scale_injection(grid, sweep_rule_of(grid), scale);
            const ConditionReport r = evaluate_conditions(grid, default_bounds(grid, rule_or_hint(pmax_opt, grid)));
            std::cout << "grid " << grid.name << " (" << grid.size() << " lines)";
            if (!std::isnan(scale)) std::cout << ", injection multiplier " << scale;
            std::cout << '\n';
            print_report(std::cout, r);
            if (!csv_path.empty()) {
                auto out = open_out(csv_path);
                out << "c1_norm,c2_norm,eta5,eta1,eta2,eta,holds,first_failure\n"
                    << fmt(r.c1_norm) << ',' << fmt(r.c2_norm) << ',' << fmt(r.eta5) << ',' << fmt(r.eta1) << ','
                    << fmt(r.eta2) << ',' << fmt(r.eta) << ',' << (r.holds ? 1 : 0) << ',' << r.first_failure() << '\n';
            }
            return r.holds ? 0 : 3;
        }
        if (lfc->parsed()) {
            const RadialGrid grid = grid_arg(grid_name);
            if (inj_path.empty() && verify_path.empty()) throw std::runtime_error("give --injections or --verify");
            SolutionFile sf;
            std::vector<cplx> s;
            if (!verify_path.empty()) {
                sf = read_solution(verify_path, grid);
                s = sf.vars.injections();
            }
            if (!inj_path.empty()) s = read_injections(inj_path, grid);
            const LoadFlowState st = solve_loadflow(grid, s);
            if (lf_csv) loadflow_csv(std::cout, grid, st);
            else print_state(std::cout, grid, st);
            int rc = 0;
            if (!verify_path.empty()) {
                double dev = 0.0;
                for (int k = 0; k < grid.size(); ++k) {
                    dev = std::max({dev, std::abs(st.S_top[k] - cplx(sf.vars.P[k], sf.vars.Q[k])),
                                    std::abs(st.v[k] - sf.vars.v[k]), std::abs(st.f[k] - sf.vars.f[k])});
                }
                const bool ok = dev <= 1e-8;
                (lf_csv ? std::cerr : std::cout) << "verify: max deviation from the load flow " << fmt(dev, 3)
                                                 << (ok ? " (consistent)" : " (NOT a load-flow solution)") << '\n';
                rc = ok ? 0 : 4;
            }
            for (const auto& v : check_operational(st, grid)) (lf_csv ? std::cerr : std::cout) << "violation: " << v.describe() << '\n';
            return rc;
        }
        if (sol->parsed()) {
            const RadialGrid grid = grid_arg(grid_name);
            const CostModel cost = cost_path.empty() ? CostModel::import_only() : parse_cost(read_text_file(cost_path), grid);
            const RadialGrid built = no_shunt ? without_shunts(grid) : grid;
            OpfProblem prob = model == "ropf" ? build_r_opf(built, cost)
                                              : build_ar_opf(built, default_bounds(built, rule_or_hint(pmax_opt, grid)), cost);
            if (!cbf_out.empty()) open_out(cbf_out) << prob.program.to_cbf();
            const OpfSolution res = solve(prob);
            std::cout << "model " << model << (no_shunt ? " (no shunt)" : "") << ": " << to_string(res.status);
            if (!res.message.empty()) std::cout << " [" << res.message << "]";
            std::cout << ", " << res.iterations << " iterations, " << fmt(res.seconds * 1e3, 4) << " ms\n";
            if (res.status != SolverStatus::Optimal) return 2;
            std::cout << "objective " << fmt(res.objective, 12) << ", import P1 " << fmt(res.vars.P[0], 12) << '\n';
            std::cout << "max exactness gap " << fmt(res.exactness_gap.maxCoeff(), 3);
            const auto strict = strict_lines(res.exactness_gap);
            if (strict.empty()) std::cout << " (relaxation tight)\n";
            else {
                std::cout << ", strict on lines";
                for (int l : strict) std::cout << ' ' << grid.labels[l];
                std::cout << '\n';
            }
            if (!sol_out.empty()) {
                SolutionFile sf{model + (no_shunt ? "-no-shunt" : ""), to_string(res.status), res.objective, res.vars};
                write_solution(sol_out, sf, grid);
                std::cout << "wrote " << sol_out << '\n';
            }
            return 0;
        }
        if (rec->parsed()) {
            const RadialGrid grid = grid_arg(grid_name);
            const SolutionFile sf = read_solution(sol_in, grid);
            const GridMatrices m = build_matrices(grid, default_bounds(grid, rule_or_hint(pmax_opt, grid)));
            const ConditionReport cr = check_all(grid, m);
            if (!cr.holds) std::cerr << "warning: condition " << cr.first_failure() << " fails; convergence is not guaranteed\n";
            const RecoveryTrace tr = recover(sf.vars, grid, m);
            if (!tr.converged) throw RecoveryError(RecoveryError::Kind::NoConvergence, "no convergence within the iteration limit");
            std::cout << "converged after " << tr.iterations() << " iterations, last |df| " << fmt(tr.delta_f_inf.back(), 3)
                      << '\n';
            const RecoveryCheck th = verify_recovery(tr, grid);
            std::cout << "load-flow residual " << fmt(th.oracle_residual, 3) << ", distance to independent load flow "
                      << fmt(th.oracle_distance, 3) << '\n';
            std::cout << "import P1 " << fmt(th.P1_input, 12) << " -> " << fmt(th.P1_recovered, 12) << '\n';
            for (const auto& f : th.failures) std::cout << "check failed: " << f << '\n';
            if (cr.holds) {
                const EnvelopeReport env = check_recovery_envelope(tr, grid, m, cr.eta);
                std::cout << "envelope: " << env.checks << " inequalities, " << env.violations.size() << " violated\n";
                for (const auto& v : env.violations)
                    std::cout << "  n=" << v.n << ' ' << v.family << " line " << v.line << ": " << fmt(v.lhs, 6) << " > "
                              << fmt(v.rhs, 6) << '\n';
            }
            if (!trace_path.empty()) {
                auto out = open_out(trace_path);
                out << "n,line,label,f,P,Qc,v,df_inf,df_two\n";
                for (int n = 0; n <= tr.iterations(); ++n) {
                    const auto& it = tr.iterates[n];
                    const double di = n ? tr.delta_f_inf[n - 1] : 0.0, d2 = n ? tr.delta_f_two[n - 1] : 0.0;
                    for (int k = 0; k < grid.size(); ++k)
                        out << n << ',' << k + 1 << ',' << grid.labels[k + 1] << ',' << fmt(it.f[k], 17) << ','
                            << fmt(it.P[k], 17) << ',' << fmt(it.Qc[k], 17) << ',' << fmt(it.v[k], 17) << ',' << fmt(di, 6)
                            << ',' << fmt(d2, 6) << '\n';
                }
            }
            if (!sol_out.empty()) {
                write_solution(sol_out, SolutionFile{"recovered", "converged", tr.recovered.P[0], tr.recovered}, grid);
                std::cout << "wrote " << sol_out << '\n';
            }
            return th.ok() ? 0 : 4;
        }
        if (b3->parsed()) {
            const RadialGrid grid = grid_arg(b3_grid);
            const std::string cp = b3_cost.empty() ? std::string(AROPF_DATA_DIR) + "/threebus.cost" : b3_cost;
            const ThreeBusComparison cmp = run_threebus_comparison(grid, parse_cost(read_text_file(cp), grid));
            for (const CurrentProfile* p : {&cmp.aropf, &cmp.ropf, &cmp.no_shunt}) {
                std::cerr << std::left << std::setw(16) << p->model << to_string(p->status) << ", max current "
                          << fmt(p->max_current_a(), 6) << " A (limit " << fmt(p->limit_a, 6) << " A), max gap "
                          << fmt(p->max_gap, 3) << (p->recovered ? ", recovered" : "")
                          << (p->note.empty() ? "" : ", " + p->note) << '\n';
            }
            if (csv_path.empty()) write_threebus_csv(std::cout, cmp);
            else {
                auto out = open_out(csv_path);
                write_threebus_csv(out, cmp);
            }
            return 0;
        }
        if (bsw->parsed()) {
            const RadialGrid grid = grid_arg(grid_name);
            SweepSettings st = sweep_settings_of(grid);
            if (!std::isnan(k_max)) st.k_hi = k_max;
            if (!pmax_opt.empty()) st.pmax = parse_pmax_rule(pmax_opt);
            const SweepResult res = sweep_conditions(grid, sweep_rule_of(grid), st);
            std::cerr << "rule " << to_string(res.rule) << ", k in [" << st.k_lo << ", " << st.k_hi << "]\n";
            if (res.violated)
                std::cerr << "first violation " << res.first_condition << " at k = " << fmt(res.first_failing.k, 6)
                          << " (" << fmt(res.first_failing.axis_mw, 6) << " MW); last holding point "
                          << fmt(res.last_holding.axis_mw, 6) << " MW, max |V_bar| " << fmt(res.last_holding.max_vbar, 6)
                          << " p.u.\n";
            else
                std::cerr << "all conditions hold over the range\n";
            if (csv_path.empty()) write_sweep_csv(std::cout, res);
            else {
                auto out = open_out(csv_path);
                write_sweep_csv(out, res);
            }
            return 0;
        }
        if (bcp->parsed()) {
            const RadialGrid grid = grid_arg(grid_name);
            const CompressionResult res =
                quantify_compression(grid, parse_compression_mode(mode), sweep_rule_of(grid), compression_settings_of(grid));
            const auto& b = res.at_binding;
            std::cerr << "mode " << mode << ": binding at k = " << fmt(res.k, 8) << " (" << fmt(res.axis_mw, 6) << " MW), "
                      << (mode == "voltage" ? "bus " : "line ") << b.label << (b.end.empty() ? "" : " " + b.end)
                      << (res.binding ? "" : " (not within tolerance)") << "; auxiliary " << fmt(b.auxiliary, 7)
                      << ", load flow " << fmt(b.original, 7) << ", gap " << fmt(b.gap, 4) << '\n';
            if (csv_path.empty()) write_compression_csv(std::cout, res);
            else {
                auto out = open_out(csv_path);
                write_compression_csv(out, res);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
