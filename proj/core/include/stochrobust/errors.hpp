#pragma once

#include <stdexcept>
#include <string>

namespace stochrobust {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model or formula text. Carries a 1-based source location.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
          line_(line), col_(col) {}
    explicit ParseError(const std::string& msg) : Error(msg), line_(0), col_(0) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

/// Structurally valid input that violates a model constraint
/// (undeclared name, negative initial count, unknown override, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// A rate/hazard/flow expression produced an inadmissible value at runtime.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Monitoring failure: horizon shortfall or unresolved variable.
class MonitorError : public Error {
public:
    using Error::Error;
};

/// Numerical linear-algebra failure (non-PD Gram matrix, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace stochrobust
