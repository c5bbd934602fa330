#include "aropf/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace aropf {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    for (const auto& [j, a] : o.terms) terms.emplace_back(j, -a);
    constant -= o.constant;
    return *this;
}

LinExpr& LinExpr::operator*=(double a) {
    for (auto& t : terms) t.second *= a;
    constant *= a;
    return *this;
}

double LinExpr::eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [j, a] : terms) v += a * x[j];
    return v;
}

LinExpr LinExpr::compressed() const {
    std::map<int, double> acc;
    for (const auto& [j, a] : terms) acc[j] += a;
    LinExpr out(constant);
    for (const auto& [j, a] : acc)
        if (a != 0.0) out.terms.emplace_back(j, a);
    return out;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }

std::vector<LinExpr> ConeBlock::standard_form() const {
    std::vector<LinExpr> out;
    if (rotated) {
        out.push_back(u + w);
        out.push_back(u - w);
        for (const auto& e : t) out.push_back(2.0 * e);
    } else {
        out.push_back(u);
        out.insert(out.end(), t.begin(), t.end());
    }
    for (auto& e : out) e = e.compressed();
    return out;
}

double ConeBlock::margin(const Eigen::VectorXd& x) const {
    const auto sf = standard_form();
    double tail = 0.0;
    for (std::size_t i = 1; i < sf.size(); ++i) tail += std::pow(sf[i].eval(x), 2);
    return sf[0].eval(x) - std::sqrt(tail);
}

int ConicProgram::add_var(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<int>(names_.size()) - 1;
}

void ConicProgram::add_eq(LinExpr e, std::string tag, int owner) {
    rows_.push_back({e.compressed(), LinearRow::Kind::Eq, std::move(tag), owner});
}

void ConicProgram::add_le(LinExpr e, std::string tag, int owner) {
    rows_.push_back({e.compressed(), LinearRow::Kind::Le, std::move(tag), owner});
}

void ConicProgram::add_range(const LinExpr& e, double lo, double hi, const std::string& tag, int owner) {
    if (lo > hi) throw std::invalid_argument(tag + ": lower bound exceeds upper bound");
    if (lo == hi) {
        add_eq(e - LinExpr(lo), tag, owner);
        return;
    }
    if (std::isfinite(hi)) add_le(e - LinExpr(hi), tag, owner);
    if (std::isfinite(lo)) add_le(LinExpr(lo) - e, tag, owner);
}

void ConicProgram::add_abs_bound(const LinExpr& slack, const LinExpr& e, const std::string& tag, int owner) {
    add_le(e - slack, tag, owner);
    add_le(-e - slack, tag, owner);
}

void ConicProgram::add_rotated_cone(LinExpr u, LinExpr w, std::vector<LinExpr> t, std::string tag, int owner) {
    cones_.push_back({true, u.compressed(), w.compressed(), std::move(t), std::move(tag), owner});
}

void ConicProgram::add_soc(LinExpr u, std::vector<LinExpr> t, std::string tag, int owner) {
    cones_.push_back({false, u.compressed(), LinExpr(), std::move(t), std::move(tag), owner});
}

void ConicProgram::add_quadratic_objective(const LinExpr& e, double coeff, const std::string& tag) {
    if (coeff < 0) throw std::invalid_argument("quadratic cost must be convex");
    if (coeff == 0) return;
    int epi = add_var(tag + "_epigraph");
    add_rotated_cone(LinExpr::var(epi), LinExpr(1.0), {e}, tag);
    objective_ += LinExpr::var(epi, coeff);
}

int ConicProgram::count_rows(const std::string& tag) const {
    return static_cast<int>(std::count_if(rows_.begin(), rows_.end(), [&](const LinearRow& r) { return r.tag == tag; }));
}

int ConicProgram::count_cones(const std::string& tag) const {
    return static_cast<int>(
        std::count_if(cones_.begin(), cones_.end(), [&](const ConeBlock& c) { return tag.empty() || c.tag == tag; }));
}

double ConicProgram::max_violation(const Eigen::VectorXd& x) const {
    double worst = 0.0;
    for (const auto& r : rows_) {
        const double v = r.expr.eval(x);
        worst = std::max(worst, r.kind == LinearRow::Kind::Eq ? std::abs(v) : v);
    }
    for (const auto& c : cones_) worst = std::max(worst, -c.margin(x));
    return worst;
}

std::string ConicProgram::to_cbf() const {
    std::ostringstream out;
    out.precision(17);
    out << "VER\n3\n\nOBJSENSE\nMIN\n\n";
    out << "VAR\n" << num_vars() << " 1\nF " << num_vars() << "\n\n";

    // Constraint blocks: equalities, inequalities (as L-), then one Q block per cone.
    std::vector<std::vector<LinExpr>> blocks;
    std::vector<std::string> kinds;
    std::vector<LinExpr> eqs, les;
    for (const auto& r : rows_) (r.kind == LinearRow::Kind::Eq ? eqs : les).push_back(r.expr);
    if (!eqs.empty()) {
        blocks.push_back(eqs);
        kinds.push_back("L=");
    }
    if (!les.empty()) {
        blocks.push_back(les);
        kinds.push_back("L-");
    }
    for (const auto& c : cones_) {
        blocks.push_back(c.standard_form());
        kinds.push_back("Q");
    }
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.size();
    out << "CON\n" << total << " " << blocks.size() << "\n";
    for (std::size_t i = 0; i < blocks.size(); ++i) out << kinds[i] << " " << blocks[i].size() << "\n";
    out << "\n";

    const LinExpr obj = objective_.compressed();
    out << "OBJACOORD\n" << obj.terms.size() << "\n";
    for (const auto& [j, a] : obj.terms) out << j << " " << a << "\n";
    out << "\nOBJBCOORD\n" << obj.constant << "\n\n";

    std::ostringstream acoord, bcoord;
    acoord.precision(17);
    bcoord.precision(17);
    std::size_t na = 0, nb = 0, row = 0;
    for (const auto& b : blocks) {
        for (const auto& e : b) {
            for (const auto& [j, a] : e.terms) {
                acoord << row << " " << j << " " << a << "\n";
                ++na;
            }
            if (e.constant != 0.0) {
                bcoord << row << " " << e.constant << "\n";
                ++nb;
            }
            ++row;
        }
    }
    out << "ACOORD\n" << na << "\n" << acoord.str() << "\n";
    out << "BCOORD\n" << nb << "\n" << bcoord.str();
    return out.str();
}

std::string to_string(SolverStatus s) {
    switch (s) {
        case SolverStatus::Optimal: return "optimal";
        case SolverStatus::Infeasible: return "infeasible";
        case SolverStatus::Unbounded: return "unbounded";
        case SolverStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

const ConicBackend& default_backend() {
    static const EcosBackend backend;
    return backend;
}

}  // namespace aropf
