#include "aropf/solution_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aropf/errors.hpp"
#include "aropf/keyvalue.hpp"

namespace aropf {

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Field {
    const char* key;
    Eigen::VectorXd OpfVariables::*member;
};

const Field kBusFields[] = {{"p", &OpfVariables::p}, {"q", &OpfVariables::q}, {"v", &OpfVariables::v},
                            {"v_bar", &OpfVariables::v_bar}};
const Field kLineFields[] = {{"P", &OpfVariables::P},         {"Q", &OpfVariables::Q},
                             {"f", &OpfVariables::f},         {"P_hat", &OpfVariables::P_hat},
                             {"Q_hat", &OpfVariables::Q_hat}, {"f_bar", &OpfVariables::f_bar},
                             {"P_bar", &OpfVariables::P_bar}, {"Q_bar", &OpfVariables::Q_bar}};

const Field* lookup(const Field* begin, const Field* end, const std::string& key) {
    for (const Field* f = begin; f != end; ++f)
        if (key == f->key) return f;
    return nullptr;
}

}  // namespace

std::string format_solution(const SolutionFile& sol, const RadialGrid& grid) {
    std::ostringstream out;
    out << "model = " << sol.model << "\n";
    out << "status = " << sol.status << "\n";
    out << "objective = " << num(sol.objective) << "\n";
    for (int k = 0; k < grid.size(); ++k) {
        out << "\n[bus " << grid.labels[k + 1] << "]\n";
        for (const Field& f : kBusFields) {
            const auto& vec = sol.vars.*f.member;
            if (vec.size() == 0) continue;
            out << f.key << " = " << num(vec[k]) << "\n";
        }
    }
    for (int k = 0; k < grid.size(); ++k) {
        out << "\n[line " << grid.labels[k + 1] << "]\n";
        for (const Field& f : kLineFields) {
            const auto& vec = sol.vars.*f.member;
            if (vec.size() == 0) continue;
            out << f.key << " = " << num(vec[k]) << "\n";
        }
    }
    return out.str();
}

SolutionFile parse_solution(std::string_view text, const RadialGrid& grid) {
    const KvDocument doc = parse_keyvalue(text);
    SolutionFile sol;
    for (const auto& e : doc.top.entries) {
        if (e.key == "model") sol.model = e.value;
        else if (e.key == "status") sol.status = e.value;
        else if (e.key == "objective") sol.objective = kv_number(e);
        else throw ParseError(e.line, e.key, "unknown solution key");
    }
    const int L = grid.size();
    // Track which fields appear so partially written vectors are rejected.
    std::map<std::string, std::set<int>> seen;
    auto store = [&](const Field* f, int k, const KvEntry& e) {
        auto& vec = sol.vars.*(f->member);
        if (vec.size() == 0) vec = Eigen::VectorXd::Zero(L);
        vec[k] = kv_number(e);
        seen[f->key].insert(k);
    };
    for (const auto& sec : doc.sections) {
        const int idx = grid.index_of_label(sec.label);
        if (idx <= 0) throw ParseError(sec.line, sec.label, "unknown bus or line label");
        const bool bus = sec.kind == "bus";
        if (!bus && sec.kind != "line") throw ParseError(sec.line, sec.kind, "unknown section in solution file");
        for (const auto& e : sec.entries) {
            const Field* f = bus ? lookup(std::begin(kBusFields), std::end(kBusFields), e.key)
                                 : lookup(std::begin(kLineFields), std::end(kLineFields), e.key);
            if (!f) throw ParseError(e.line, e.key, "unknown solution field");
            store(f, idx - 1, e);
        }
    }
    for (const auto& [key, ids] : seen)
        if (static_cast<int>(ids.size()) != L) throw ParseError(0, key, "field missing for some buses or lines");
    for (const char* required : {"p", "q", "P", "Q", "v", "f"})
        if (!seen.count(required)) throw ParseError(0, required, "required solution field missing");
    return sol;
}

void write_solution(const std::string& path, const SolutionFile& sol, const RadialGrid& grid) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << format_solution(sol, grid);
}

SolutionFile read_solution(const std::string& path, const RadialGrid& grid) {
    return parse_solution(read_text_file(path), grid);
}

std::vector<cplx> parse_injections(std::string_view text, const RadialGrid& grid) {
    const KvDocument doc = parse_keyvalue(text);
    if (!doc.top.entries.empty()) throw ParseError(doc.top.entries[0].line, doc.top.entries[0].key, "expected a [bus] section");
    std::vector<cplx> s(grid.size(), cplx(0.0, 0.0));
    std::set<int> done;
    for (const auto& sec : doc.sections) {
        if (sec.kind != "bus") throw ParseError(sec.line, sec.kind, "unknown section in injection file");
        const int idx = grid.index_of_label(sec.label);
        if (idx <= 0) throw ParseError(sec.line, sec.label, "unknown bus");
        if (!done.insert(idx).second) throw ParseError(sec.line, sec.label, "bus listed twice");
        double p = 0.0, q = 0.0;
        for (const auto& e : sec.entries) {
            if (e.key == "p") p = kv_number(e);
            else if (e.key == "q") q = kv_number(e);
            else throw ParseError(e.line, e.key, "unknown injection key");
        }
        s[idx - 1] = {p, q};
    }
    return s;
}

std::vector<cplx> read_injections(const std::string& path, const RadialGrid& grid) {
    return parse_injections(read_text_file(path), grid);
}

}  // namespace aropf
