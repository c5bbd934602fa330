#pragma once

// Solution files: top-level model/status/objective, then [bus label] and [line label]
// sections holding the OpfVariables entries. Values are written with 17 significant digits.

#include <string>
#include <string_view>
#include <vector>

#include "aropf/loadflow.hpp"
#include "aropf/network.hpp"
#include "aropf/opf.hpp"

namespace aropf {

struct SolutionFile {
    std::string model;   // "aropf", "ropf", "aropf-no-shunt", "recovered"
    std::string status;  // solver status or "converged"
    double objective = 0.0;
    OpfVariables vars;
};

std::string format_solution(const SolutionFile& sol, const RadialGrid& grid);
SolutionFile parse_solution(std::string_view text, const RadialGrid& grid);
void write_solution(const std::string& path, const SolutionFile& sol, const RadialGrid& grid);
SolutionFile read_solution(const std::string& path, const RadialGrid& grid);

// Injection files: [bus label] sections with p and q (absorption positive, per unit).
// Buses without a section absorb nothing.
std::vector<cplx> parse_injections(std::string_view text, const RadialGrid& grid);
std::vector<cplx> read_injections(const std::string& path, const RadialGrid& grid);

}  // namespace aropf
