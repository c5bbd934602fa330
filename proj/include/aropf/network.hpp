#pragma once

// Radial grid model. Buses and lines are labelled 1..L, line l ends at bus l,
// bus 0 is the slack. Vectors below hold entry l-1 for label l.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace aropf {

struct InjectionSet {
    enum class Kind { Box, FixedPowerFactor, MinPowerFactor };
    Kind kind = Kind::Box;
    double rho = 1.0;
    // Fixed power factor only: lagging means q = +k p (absorbing both), leading q = -k p.
    bool leading = false;

    double tan_phi() const;  // sqrt(1 - rho^2) / rho
};

struct Bus {
    int id = 0;
    double p_min = 0.0, p_max = 0.0;
    double q_min = 0.0, q_max = 0.0;
    InjectionSet injection;
};

struct Line {
    int id = 0;
    int up = 0;
    double r = 0.0, x = 0.0;
    double b = 0.0;  // per end
    double i_max_sq = 0.0;
    double length_km = 0.0;  // 0 when the file gives only per-unit data
    bool shunt_free = false; // series-only element such as a transformer; b must be 0
};

struct PerUnitBase {
    double s_base = 1.0;  // VA
    double v_base = 1.0;  // V, line-to-line
    double f_base = 50.0; // Hz
    std::optional<double> i_base;  // A; three-phase S/(sqrt(3) V) when absent

    double z_base() const { return v_base * v_base / s_base; }
    double current_base() const;
};

struct GridOptions {
    bool allow_zero_shunt = false;
    bool check_voltage_order = true;  // 0 < v_min < v0 < v_max
};

struct RadialGrid {
    std::string name;
    double v0 = 1.0;
    double v_min = 0.81;
    double v_max = 1.21;
    std::vector<Bus> buses;  // size L
    std::vector<Line> lines; // size L
    PerUnitBase base;

    std::vector<std::string> labels;          // external label per bus, [0] = slack
    std::map<std::string, std::string> bench; // optional [bench] hints

    int size() const { return static_cast<int>(lines.size()); }
    // 0-based index of the upstream line of line index k, or -1 for line 1.
    int up_index(int k) const { return lines[k].up - 1; }
    std::vector<std::vector<int>> children() const;  // 0-based line indices
    std::vector<int> topological_order() const;       // parents before children
    int index_of_label(std::string_view label) const; // bus index 0..L, -1 if absent

    Eigen::VectorXd r() const;
    Eigen::VectorXd x() const;
    Eigen::VectorXd b() const;
    Eigen::VectorXd i_max_sq() const;
};

RadialGrid parse_grid(std::string_view text, const GridOptions& opts = {});
RadialGrid load_grid(const std::string& path, const GridOptions& opts = {});
// Locate a bundled grid by short name ("threebus", "ieee34", "cigre_mv") or path.
std::string resolve_grid_path(const std::string& name_or_path);

void validate(const RadialGrid& grid, const GridOptions& opts = {});

struct PerUnitLine {
    double r, x, b;
};
struct PhysicalLine {
    double r_ohm_per_km, l_mh_per_km, c_uf_per_km;
};

PerUnitLine to_per_unit(double r_ohm_per_km, double l_mh_per_km, double c_uf_per_km, double length_km,
                        const PerUnitBase& base);
PhysicalLine from_per_unit(const PerUnitLine& pu, double length_km, const PerUnitBase& base);

Eigen::MatrixXd adjacency(const RadialGrid& grid);
Eigen::MatrixXd closure(const Eigen::MatrixXd& G);

// Copy of the grid with every b set to zero.
RadialGrid without_shunts(const RadialGrid& grid);
// Copy with r, x, b multiplied by k (uniform line-length scaling).
RadialGrid scale_lengths(const RadialGrid& grid, double k);

}  // namespace aropf
