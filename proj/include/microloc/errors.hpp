#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace microloc {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// DSL text did not parse; carries 1-based line/column of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

/// Evaluation failed (division by ~zero, non-real affine scale, missing net sample, ...).
class EvalError : public Error {
public:
    using Error::Error;
};

/// A reciprocal node was evaluated outside its declared nonvanishing region.
class GuardViolation : public EvalError {
public:
    using EvalError::EvalError;
};

/// Log-log order fit had fewer than 5 usable (nonzero) tail points.
class DegenerateFitError : public Error {
public:
    DegenerateFitError(const std::string& msg, std::size_t zero_count)
        : Error(msg), zero_count_(zero_count) {}
    std::size_t zero_count() const { return zero_count_; }

private:
    std::size_t zero_count_;
};

/// Symbolic expression growth exceeded the configured node budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(std::size_t used, std::size_t cap)
        : Error("expression node budget exceeded: " + std::to_string(used) + " > " +
                std::to_string(cap)),
          used_(used), cap_(cap) {}
    std::size_t used() const { return used_; }
    std::size_t cap() const { return cap_; }

private:
    std::size_t used_, cap_;
};

/// Two quadrature refinement levels disagreed beyond tolerance.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// A checker precondition was not met (e.g. cross-check on a failing principal part).
class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace microloc
