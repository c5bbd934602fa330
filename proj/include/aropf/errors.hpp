#pragma once

#include <stdexcept>
#include <string>

namespace aropf {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, std::string field, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + (field.empty() ? "" : " [" + field + "]") +
                             ": " + what),
          line_(line), field_(std::move(field)) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when C = (I - G^T - M)^-1 is requested but ||H^T M||_F >= 1.
class ConditionError : public std::runtime_error {
public:
    ConditionError(const std::string& what, double norm) : std::runtime_error(what), norm_(norm) {}
    double norm() const { return norm_; }

private:
    double norm_;
};

class LoadFlowError : public std::runtime_error {
public:
    enum class Kind { NonConvergence, VoltageCollapse };
    LoadFlowError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class RecoveryError : public std::runtime_error {
public:
    enum class Kind { Divergence, VoltageCollapse, NoConvergence };
    RecoveryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace aropf
