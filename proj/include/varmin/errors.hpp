#pragma once

#include <stdexcept>
#include <string>

namespace varmin {

// Error raised while parsing an expression string. `offset` is the byte
// position in the source where the error was detected.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t offset)
        : std::runtime_error(std::move(message)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Error raised when an expression is evaluated outside the domain of one of
// its primitives (log of a nonpositive number, division by zero, ...).
class EvalDomainError : public std::runtime_error {
public:
    EvalDomainError(std::string function, double argument)
        : std::runtime_error("domain error in " + function + " at argument " +
                             std::to_string(argument)),
          function_(std::move(function)), argument_(argument) {}
    const std::string& function() const { return function_; }
    double argument() const { return argument_; }

private:
    std::string function_;
    double argument_;
};

// Family of runtime numerical failures. `code` is a stable identifier used
// by the CLI and by reports (NO_CONVERGENCE, SINGULAR_A, SINGULAR_LEGENDRE,
// NO_BRACKET, NONFINITE_Q, STEP_UNDERFLOW, INAPPLICABLE, ...).
class NumericError : public std::runtime_error {
public:
    NumericError(std::string code, std::string message, double where = 0.0)
        : std::runtime_error(code + ": " + message), code_(std::move(code)),
          where_(where) {}
    const std::string& code() const { return code_; }
    double where() const { return where_; }

private:
    std::string code_;
    double where_;
};

} // namespace varmin
