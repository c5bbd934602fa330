#include "aropf/network.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

#include "aropf/errors.hpp"
#include "aropf/keyvalue.hpp"

namespace aropf {

double InjectionSet::tan_phi() const { return std::sqrt(1.0 - rho * rho) / rho; }

double PerUnitBase::current_base() const {
    if (i_base) return *i_base;
    return s_base / (std::sqrt(3.0) * v_base);
}

std::vector<std::vector<int>> RadialGrid::children() const {
    std::vector<std::vector<int>> ch(lines.size());
    for (int k = 0; k < size(); ++k)
        if (int u = up_index(k); u >= 0) ch[u].push_back(k);
    return ch;
}

std::vector<int> RadialGrid::topological_order() const {
    // labels are assigned so that up(l) < l
    std::vector<int> order(lines.size());
    for (int k = 0; k < size(); ++k) order[k] = k;
    return order;
}

int RadialGrid::index_of_label(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i);
    return -1;
}

Eigen::VectorXd RadialGrid::r() const {
    Eigen::VectorXd v(size());
    for (int k = 0; k < size(); ++k) v[k] = lines[k].r;
    return v;
}
Eigen::VectorXd RadialGrid::x() const {
    Eigen::VectorXd v(size());
    for (int k = 0; k < size(); ++k) v[k] = lines[k].x;
    return v;
}
Eigen::VectorXd RadialGrid::b() const {
    Eigen::VectorXd v(size());
    for (int k = 0; k < size(); ++k) v[k] = lines[k].b;
    return v;
}
Eigen::VectorXd RadialGrid::i_max_sq() const {
    Eigen::VectorXd v(size());
    for (int k = 0; k < size(); ++k) v[k] = lines[k].i_max_sq;
    return v;
}

PerUnitLine to_per_unit(double r_ohm_per_km, double l_mh_per_km, double c_uf_per_km, double length_km,
                        const PerUnitBase& base) {
    if (!(r_ohm_per_km > 0) || !(l_mh_per_km > 0) || !(c_uf_per_km > 0) || !(length_km > 0))
        throw ValidationError("to_per_unit: line data and length must be strictly positive");
    if (!(base.s_base > 0) || !(base.v_base > 0) || !(base.f_base > 0))
        throw ValidationError("to_per_unit: base quantities must be strictly positive");
    const double zb = base.z_base();
    const double w = 2.0 * std::numbers::pi * base.f_base;
    return {r_ohm_per_km * length_km / zb, w * l_mh_per_km * 1e-3 * length_km / zb,
            w * c_uf_per_km * 1e-6 * length_km / 2.0 * zb};
}

PhysicalLine from_per_unit(const PerUnitLine& pu, double length_km, const PerUnitBase& base) {
    if (!(length_km > 0)) throw ValidationError("from_per_unit: length must be strictly positive");
    const double zb = base.z_base();
    const double w = 2.0 * std::numbers::pi * base.f_base;
    return {pu.r * zb / length_km, pu.x * zb / (w * 1e-3 * length_km), 2.0 * pu.b / (zb * w * 1e-6 * length_km)};
}

Eigen::MatrixXd adjacency(const RadialGrid& grid) {
    const int L = grid.size();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(L, L);
    for (int k = 0; k < L; ++k)
        if (int u = grid.up_index(k); u >= 0) G(u, k) = 1.0;
    return G;
}

Eigen::MatrixXd closure(const Eigen::MatrixXd& G) {
    // H = I + G + G^2 + ... ; G is nilpotent so the sum terminates.
    const auto L = G.rows();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(L, L);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(L, L);
    for (Eigen::Index n = 1; n <= L; ++n) {
        term = term * G;
        if (term.isZero(0.0)) break;
        H += term;
    }
    return H;
}

RadialGrid without_shunts(const RadialGrid& grid) {
    RadialGrid g = grid;
    for (auto& l : g.lines) l.b = 0.0;
    return g;
}

RadialGrid scale_lengths(const RadialGrid& grid, double k) {
    RadialGrid g = grid;
    for (auto& l : g.lines) {
        l.r *= k;
        l.x *= k;
        l.b *= k;
        l.length_km *= k;
    }
    return g;
}

void validate(const RadialGrid& grid, const GridOptions& opts) {
    const int L = grid.size();
    if (L < 1) throw ValidationError("grid has no lines");
    if (static_cast<int>(grid.buses.size()) != L) throw ValidationError("bus and line counts differ");
    int slack_children = 0;
    for (int k = 0; k < L; ++k) {
        const Line& ln = grid.lines[k];
        if (ln.id != k + 1 || grid.buses[k].id != k + 1) throw ValidationError("labels must be contiguous 1..L");
        if (ln.up < 0 || ln.up >= ln.id) throw ValidationError("line " + std::to_string(ln.id) + ": up must precede it");
        if (ln.up == 0) ++slack_children;
        const std::string who = "line " + std::to_string(ln.id) + ": ";
        if (!(ln.r > 0)) throw ValidationError(who + "r must be > 0");
        if (!(ln.x > 0)) throw ValidationError(who + "x must be > 0");
        if (ln.shunt_free) {
            if (ln.b != 0.0) throw ValidationError(who + "b must be 0 on a line marked 'shunt = none'");
        } else if (opts.allow_zero_shunt ? !(ln.b >= 0) : !(ln.b > 0))
            throw ValidationError(who + (opts.allow_zero_shunt ? "b must be >= 0" : "b must be > 0 (see --allow-zero-shunt)"));
        if (!(ln.i_max_sq > 0)) throw ValidationError(who + "i_max_sq must be > 0");
        const Bus& bus = grid.buses[k];
        const std::string bwho = "bus " + std::to_string(bus.id) + ": ";
        if (bus.p_min > bus.p_max) throw ValidationError(bwho + "p_min > p_max");
        if (bus.q_min > bus.q_max) throw ValidationError(bwho + "q_min > q_max");
        if (!(bus.injection.rho > 0) || bus.injection.rho > 1) throw ValidationError(bwho + "power factor outside (0,1]");
    }
    if (slack_children != 1 || grid.lines[0].up != 0)
        throw ValidationError("exactly one line (line 1) must leave the slack bus");
    if (!(grid.v0 > 0)) throw ValidationError("v0 must be > 0");
    if (opts.check_voltage_order && !(0 < grid.v_min && grid.v_min < grid.v0 && grid.v0 < grid.v_max))
        throw ValidationError("voltage limits must satisfy 0 < v_min < v0 < v_max");
    if (!(grid.base.s_base > 0) || !(grid.base.v_base > 0) || !(grid.base.f_base > 0))
        throw ValidationError("base quantities must be strictly positive");
}

namespace {

struct RawDefaults {
    std::optional<double> r_ohm_per_km, l_mh_per_km, c_uf_per_km, length_km;
};

struct PendingLine {
    std::string label, up_label;
    int line = 0;
    std::optional<double> r, x, b, i_max_sq, i_max_a, length_km, r_km, l_km, c_km;
    bool shunt_free = false;
};

struct PendingBus {
    std::string label;
    int line = 0;
    Bus bus;
};

InjectionSet parse_injection(const KvEntry& e) {
    std::istringstream ss(e.value);
    std::string kind;
    ss >> kind;
    InjectionSet set;
    if (kind == "box") return set;
    double rho = 0;
    if (!(ss >> rho)) throw ParseError(e.line, e.key, "missing power factor");
    set.rho = rho;
    if (kind == "fixed_pf") {
        set.kind = InjectionSet::Kind::FixedPowerFactor;
        std::string dir = "lagging";
        ss >> dir;
        if (dir == "leading") set.leading = true;
        else if (dir != "lagging") throw ParseError(e.line, e.key, "expected 'lagging' or 'leading'");
    } else if (kind == "min_pf") {
        set.kind = InjectionSet::Kind::MinPowerFactor;
    } else {
        throw ParseError(e.line, e.key, "unknown injection set '" + kind + "'");
    }
    std::string extra;
    if (ss >> extra) throw ParseError(e.line, e.key, "trailing text '" + extra + "'");
    return set;
}

}  // namespace

RadialGrid parse_grid(std::string_view text, const GridOptions& opts) {
    KvDocument doc = parse_keyvalue(text);
    RadialGrid grid;
    std::string slack = "0";
    bool have_raw = false;
    RawDefaults raw;
    std::vector<PendingLine> plines;
    std::vector<PendingBus> pbuses;

    for (const auto& e : doc.top.entries) {
        if (e.key == "name") grid.name = e.value;
        else throw ParseError(e.line, e.key, "unknown top-level key");
    }
    bool have_base = false;
    for (const auto& sec : doc.sections) {
        auto need_no_label = [&] {
            if (!sec.label.empty()) throw ParseError(sec.line, sec.kind, "section takes no label");
        };
        if (sec.kind == "base") {
            need_no_label();
            have_base = true;
            for (const auto& e : sec.entries) {
                double v = kv_number(e);
                if (e.key == "s_base") grid.base.s_base = v;
                else if (e.key == "v_base") grid.base.v_base = v;
                else if (e.key == "f_base") grid.base.f_base = v;
                else if (e.key == "i_base") grid.base.i_base = v;
                else throw ParseError(e.line, e.key, "unknown key in [base]");
                if (!(v > 0)) throw ParseError(e.line, e.key, "must be strictly positive");
            }
        } else if (sec.kind == "grid") {
            need_no_label();
            for (const auto& e : sec.entries) {
                if (e.key == "slack") slack = e.value;
                else if (e.key == "v0") grid.v0 = kv_number(e);
                else if (e.key == "v_min") grid.v_min = kv_number(e);
                else if (e.key == "v_max") grid.v_max = kv_number(e);
                else throw ParseError(e.line, e.key, "unknown key in [grid]");
            }
        } else if (sec.kind == "raw") {
            need_no_label();
            have_raw = true;
            for (const auto& e : sec.entries) {
                double v = kv_number(e);
                if (e.key == "r_ohm_per_km") raw.r_ohm_per_km = v;
                else if (e.key == "l_mh_per_km") raw.l_mh_per_km = v;
                else if (e.key == "c_uf_per_km") raw.c_uf_per_km = v;
                else if (e.key == "length_km") raw.length_km = v;
                else throw ParseError(e.line, e.key, "unknown key in [raw]");
            }
        } else if (sec.kind == "bench") {
            need_no_label();
            for (const auto& e : sec.entries) grid.bench[e.key] = e.value;
        } else if (sec.kind == "bus") {
            if (sec.label.empty()) throw ParseError(sec.line, "bus", "missing bus label");
            PendingBus pb;
            pb.label = sec.label;
            pb.line = sec.line;
            for (const auto& e : sec.entries) {
                if (e.key == "p_min") pb.bus.p_min = kv_number(e);
                else if (e.key == "p_max") pb.bus.p_max = kv_number(e);
                else if (e.key == "q_min") pb.bus.q_min = kv_number(e);
                else if (e.key == "q_max") pb.bus.q_max = kv_number(e);
                else if (e.key == "p") pb.bus.p_min = pb.bus.p_max = kv_number(e);
                else if (e.key == "q") pb.bus.q_min = pb.bus.q_max = kv_number(e);
                else if (e.key == "injection") pb.bus.injection = parse_injection(e);
                else throw ParseError(e.line, e.key, "unknown key in [bus]");
            }
            pbuses.push_back(std::move(pb));
        } else if (sec.kind == "line") {
            if (sec.label.empty()) throw ParseError(sec.line, "line", "missing line label");
            PendingLine pl;
            pl.label = sec.label;
            pl.line = sec.line;
            for (const auto& e : sec.entries) {
                if (e.key == "up") { pl.up_label = e.value; continue; }
                if (e.key == "shunt") {
                    if (e.value != "none") throw ParseError(e.line, e.key, "only 'shunt = none' is accepted");
                    pl.shunt_free = true;
                    continue;
                }
                double v = kv_number(e);
                if (e.key == "r") pl.r = v;
                else if (e.key == "x") pl.x = v;
                else if (e.key == "b") pl.b = v;
                else if (e.key == "i_max_sq") pl.i_max_sq = v;
                else if (e.key == "i_max_a") pl.i_max_a = v;
                else if (e.key == "length_km") pl.length_km = v;
                else if (e.key == "r_ohm_per_km") pl.r_km = v;
                else if (e.key == "l_mh_per_km") pl.l_km = v;
                else if (e.key == "c_uf_per_km") pl.c_km = v;
                else throw ParseError(e.line, e.key, "unknown key in [line]");
            }
            if (pl.up_label.empty()) throw ParseError(sec.line, "up", "line has no upstream bus");
            plines.push_back(std::move(pl));
        } else {
            throw ParseError(sec.line, sec.kind, "unknown section");
        }
    }
    if (!have_base) throw ParseError(0, "base", "missing [base] section");

    // Topology: every line is keyed by its downstream bus label.
    std::map<std::string, int> line_of;
    for (std::size_t i = 0; i < plines.size(); ++i) {
        const auto& pl = plines[i];
        if (pl.label == slack) throw ValidationError("line " + pl.label + " ends at the slack bus");
        if (!line_of.emplace(pl.label, static_cast<int>(i)).second)
            throw ValidationError("bus " + pl.label + " has multiple parents");
    }
    std::map<std::string, std::vector<int>> kids;
    for (std::size_t i = 0; i < plines.size(); ++i) {
        const auto& pl = plines[i];
        if (pl.up_label != slack && !line_of.count(pl.up_label))
            throw ValidationError("bus " + pl.up_label + " (upstream of " + pl.label + ") is disconnected");
        kids[pl.up_label].push_back(static_cast<int>(i));
    }
    for (const auto& pb : pbuses) {
        if (pb.label == slack) throw ValidationError("the slack bus carries no injection bounds");
        if (!line_of.count(pb.label)) throw ValidationError("bus " + pb.label + " is disconnected");
    }

    // Keep labels 1..L when they already satisfy up(l) < l, otherwise depth-first preorder.
    std::vector<int> order;
    bool numeric = slack == "0";
    if (numeric) {
        std::set<int> seen;
        for (const auto& pl : plines) {
            char* end = nullptr;
            long id = std::strtol(pl.label.c_str(), &end, 10);
            long up = std::strtol(pl.up_label.c_str(), &end, 10);
            if (*end != '\0' || std::to_string(id) != pl.label || std::to_string(up) != pl.up_label || id < 1 ||
                id > static_cast<long>(plines.size()) || up >= id) {
                numeric = false;
                break;
            }
            seen.insert(static_cast<int>(id));
        }
        numeric = numeric && seen.size() == plines.size();
        if (numeric) {
            order.resize(plines.size());
            for (std::size_t i = 0; i < plines.size(); ++i) order[std::stoi(plines[i].label) - 1] = static_cast<int>(i);
        }
    }
    if (!numeric) {
        std::vector<int> stack;
        auto push_children = [&](const std::string& label) {
            auto it = kids.find(label);
            if (it == kids.end()) return;
            for (auto c = it->second.rbegin(); c != it->second.rend(); ++c) stack.push_back(*c);
        };
        push_children(slack);
        std::vector<char> visited(plines.size(), 0);
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            if (visited[i]) throw ValidationError("cycle through bus " + plines[i].label);
            visited[i] = 1;
            order.push_back(i);
            push_children(plines[i].label);
        }
        if (order.size() != plines.size()) {
            for (std::size_t i = 0; i < plines.size(); ++i)
                if (!visited[i]) throw ValidationError("bus " + plines[i].label + " is not reachable from the slack (cycle)");
        }
    }

    const int L = static_cast<int>(plines.size());
    std::map<std::string, int> new_id;
    new_id[slack] = 0;
    for (int k = 0; k < L; ++k) new_id[plines[order[k]].label] = k + 1;
    grid.labels.resize(L + 1);
    grid.labels[0] = slack;
    grid.lines.resize(L);
    grid.buses.resize(L);
    for (int k = 0; k < L; ++k) {
        const PendingLine& pl = plines[order[k]];
        grid.labels[k + 1] = pl.label;
        Line& ln = grid.lines[k];
        ln.id = k + 1;
        ln.up = new_id.at(pl.up_label);
        ln.shunt_free = pl.shunt_free;
        const bool raw_line = pl.length_km || pl.r_km || pl.l_km || pl.c_km;
        if (raw_line) {
            if (pl.r || pl.x || pl.b) throw ParseError(pl.line, "r", "mixes per-unit and physical line data");
            auto pick = [&](const std::optional<double>& own, const std::optional<double>& dflt, const char* key) {
                if (own) return *own;
                if (dflt) return *dflt;
                throw ParseError(pl.line, key, "missing physical line parameter");
            };
            PerUnitLine pu = to_per_unit(pick(pl.r_km, raw.r_ohm_per_km, "r_ohm_per_km"),
                                         pick(pl.l_km, raw.l_mh_per_km, "l_mh_per_km"),
                                         pick(pl.c_km, raw.c_uf_per_km, "c_uf_per_km"),
                                         pick(pl.length_km, raw.length_km, "length_km"), grid.base);
            ln.length_km = pick(pl.length_km, raw.length_km, "length_km");
            ln.r = pu.r;
            ln.x = pu.x;
            ln.b = pu.b;
        } else if (have_raw && !pl.r && !pl.x && !pl.b && raw.length_km) {
            PerUnitLine pu = to_per_unit(raw.r_ohm_per_km.value_or(0), raw.l_mh_per_km.value_or(0),
                                         raw.c_uf_per_km.value_or(0), *raw.length_km, grid.base);
            ln.length_km = *raw.length_km;
            ln.r = pu.r;
            ln.x = pu.x;
            ln.b = pu.b;
        } else {
            if (!pl.r) throw ParseError(pl.line, "r", "missing");
            if (!pl.x) throw ParseError(pl.line, "x", "missing");
            ln.r = *pl.r;
            ln.x = *pl.x;
            ln.b = pl.b.value_or(0.0);
            if (!pl.b && !opts.allow_zero_shunt && !pl.shunt_free) throw ParseError(pl.line, "b", "missing");
        }
        if (pl.i_max_sq && pl.i_max_a) throw ParseError(pl.line, "i_max_a", "give either i_max_sq or i_max_a");
        if (pl.i_max_a) {
            const double pu = *pl.i_max_a / grid.base.current_base();
            ln.i_max_sq = pu * pu;
        } else if (pl.i_max_sq) {
            ln.i_max_sq = *pl.i_max_sq;
        } else {
            throw ParseError(pl.line, "i_max_sq", "missing ampacity");
        }
        grid.buses[k].id = k + 1;
    }
    std::set<std::string> seen_bus;
    for (const auto& pb : pbuses) {
        if (!seen_bus.insert(pb.label).second) throw ParseError(pb.line, "bus", "duplicate bus section " + pb.label);
        int k = new_id.at(pb.label) - 1;
        Bus b = pb.bus;
        b.id = k + 1;
        grid.buses[k] = b;
    }

    validate(grid, opts);
    return grid;
}

RadialGrid load_grid(const std::string& path, const GridOptions& opts) {
    return parse_grid(read_text_file(resolve_grid_path(path)), opts);
}

std::string resolve_grid_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path)) return name_or_path;
    fs::path bundled = fs::path(AROPF_DATA_DIR) / (name_or_path + ".grid");
    if (fs::exists(bundled)) return bundled.string();
    throw std::runtime_error("grid not found: " + name_or_path);
}

}  // namespace aropf
