#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "varmin/errors.hpp"

namespace varmin {

// Closed-form expression in the variables (t, x[1..n], dx[1..n]).
//
// Supported grammar: +, -, *, /, ^ (right associative), unary minus,
// sin/cos/tan/exp/log/sqrt, constants pi and e, numeric literals.
// A literal rational exponent with odd denominator, written base^(p/q),
// denotes the real q-th root raised to p and stays real for negative bases.
// A general (non-literal) exponent is lowered to exp(exponent*log(base)).
//
// Expr is immutable after construction and cheap to copy (shared AST and
// instruction tape). Evaluation lives in ad.hpp.

enum class NodeKind {
    Const, VarT, VarX, VarDx,
    Add, Sub, Mul, Div, Neg,
    Sin, Cos, Tan, Exp, Log, Sqrt,
    PowInt, // child a raised to integer p
    RPow,   // real odd-root power: (q-th root of a)^p, q odd positive
};

struct Node {
    NodeKind kind;
    double value = 0.0;      // Const
    int index = 0;           // VarX / VarDx, 1-based
    long p = 0, q = 1;       // PowInt (p), RPow (p, q)
    std::shared_ptr<const Node> a, b;
    std::size_t offset = npos; // byte offset in the source, if parsed

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

using NodePtr = std::shared_ptr<const Node>;

struct Tape; // defined in ad.hpp

class Expr {
public:
    Expr() = default;

    // Parse `source` over dimension n (n == 0 allows only the variable t,
    // for trajectory pieces). Throws ParseError.
    static Expr parse(std::string_view source, int dimension);

    // Programmatic builders.
    static Expr constant(double c);
    static Expr time_var(int dimension = 0);
    static Expr state(int index, int dimension);   // x[index], 1-based
    static Expr velocity(int index, int dimension); // dx[index], 1-based

    Expr operator+(const Expr& rhs) const;
    Expr operator-(const Expr& rhs) const;
    Expr operator*(const Expr& rhs) const;
    Expr operator/(const Expr& rhs) const;
    Expr operator-() const;
    Expr pow_int(long k) const;
    static Expr sin(const Expr& e);
    static Expr cos(const Expr& e);
    static Expr tan(const Expr& e);
    static Expr exp(const Expr& e);
    static Expr log(const Expr& e);
    static Expr sqrt(const Expr& e);

    bool empty() const { return root_ == nullptr; }
    int dimension() const { return n_; }
    const NodePtr& root() const { return root_; }
    const std::shared_ptr<const Tape>& tape() const { return tape_; }

    // Canonical text form; parse(print(), n) evaluates identically.
    std::string print() const;

    // Structural queries (syntactic, used for fast paths and diagnostics).
    bool references_state() const;
    bool references_velocity() const;
    bool references_time() const;

private:
    Expr(NodePtr root, int n);

    NodePtr root_;
    std::shared_ptr<const Tape> tape_;
    int n_ = 0;
};

} // namespace varmin
