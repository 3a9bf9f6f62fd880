#include "varmin/expr.hpp"

#include "varmin/ad.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

namespace varmin {

namespace {

NodePtr mk(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr mk_const(double v, std::size_t off = Node::npos) {
    Node n;
    n.kind = NodeKind::Const;
    n.value = v;
    n.offset = off;
    return mk(n);
}

NodePtr mk_unary(NodeKind k, NodePtr a, std::size_t off = Node::npos) {
    Node n;
    n.kind = k;
    n.a = std::move(a);
    n.offset = off;
    return mk(n);
}

NodePtr mk_binary(NodeKind k, NodePtr a, NodePtr b,
                  std::size_t off = Node::npos) {
    Node n;
    n.kind = k;
    n.a = std::move(a);
    n.b = std::move(b);
    n.offset = off;
    return mk(n);
}

NodePtr mk_powi(NodePtr a, long p, std::size_t off = Node::npos) {
    Node n;
    n.kind = NodeKind::PowInt;
    n.a = std::move(a);
    n.p = p;
    n.offset = off;
    return mk(n);
}

NodePtr mk_rpow(NodePtr a, long p, long q, std::size_t off = Node::npos) {
    Node n;
    n.kind = NodeKind::RPow;
    n.a = std::move(a);
    n.p = p;
    n.q = q;
    n.offset = off;
    return mk(n);
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
    Parser(std::string_view src, int n) : src_(src), n_(n) {}

    NodePtr run() {
        skip_ws();
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            fail("unexpected trailing input", pos_);
        return e;
    }

private:
    std::string_view src_;
    int n_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, std::size_t off) {
        throw ParseError(what + " at offset " + std::to_string(off), off);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            std::size_t off = pos_;
            if (eat('+'))
                lhs = mk_binary(NodeKind::Add, lhs, parse_term(), off);
            else if (eat('-'))
                lhs = mk_binary(NodeKind::Sub, lhs, parse_term(), off);
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            std::size_t off = pos_;
            if (eat('*'))
                lhs = mk_binary(NodeKind::Mul, lhs, parse_unary(), off);
            else if (eat('/'))
                lhs = mk_binary(NodeKind::Div, lhs, parse_unary(), off);
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        std::size_t off = pos_;
        if (eat('-'))
            return mk_unary(NodeKind::Neg, parse_unary(), off);
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        std::size_t off = pos_;
        if (eat('^')) {
            NodePtr exponent = parse_unary(); // right associative
            return lower_pow(std::move(base), exponent, off);
        }
        return base;
    }

    // Literal rational exponents lower to PowInt / RPow; anything else
    // lowers to exp(exponent * log(base)).
    NodePtr lower_pow(NodePtr base, const NodePtr& exponent, std::size_t off) {
        if (auto r = as_rational(exponent)) {
            auto [p, q] = *r;
            if (q == 0)
                fail("zero denominator in rational exponent", off);
            if (q < 0) {
                p = -p;
                q = -q;
            }
            if (q == 1)
                return mk_powi(std::move(base), p, off);
            if (q % 2 == 0)
                fail("even-denominator rational power is not real-valued on "
                     "negative bases; use an odd denominator",
                     off);
            return mk_rpow(std::move(base), p, q, off);
        }
        NodePtr ln = mk_unary(NodeKind::Log, std::move(base), off);
        NodePtr prod = mk_binary(NodeKind::Mul, exponent, std::move(ln), off);
        return mk_unary(NodeKind::Exp, std::move(prod), off);
    }

    static std::optional<std::pair<long, long>> as_rational(const NodePtr& e) {
        switch (e->kind) {
        case NodeKind::Const: {
            double r = std::round(e->value);
            if (r == e->value && std::fabs(r) < 1e15)
                return std::make_pair(static_cast<long>(r), 1L);
            return std::nullopt;
        }
        case NodeKind::Neg: {
            auto inner = as_rational(e->a);
            if (!inner)
                return std::nullopt;
            return std::make_pair(-inner->first, inner->second);
        }
        case NodeKind::Div: {
            auto num = as_rational(e->a);
            auto den = as_rational(e->b);
            if (!num || !den || num->second != 1 || den->second != 1)
                return std::nullopt;
            return std::make_pair(num->first, den->first);
        }
        default:
            return std::nullopt;
        }
    }

    NodePtr parse_primary() {
        skip_ws();
        std::size_t off = pos_;
        if (pos_ >= src_.size())
            fail("unexpected end of input; expected a value", off);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!eat(')'))
                fail("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)))
            return parse_ident();
        fail(std::string("unexpected character '") + c +
                 "'; expected number, symbol, function or '('",
             off);
    }

    NodePtr parse_number() {
        std::size_t off = pos_;
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            fail("malformed number", off);
        pos_ += static_cast<std::size_t>(end - begin);
        return mk_const(v, off);
    }

    NodePtr parse_ident() {
        std::size_t off = pos_;
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_'))
            ++pos_;
        std::string_view name = src_.substr(start, pos_ - start);

        if (name == "pi")
            return mk_const(M_PI, off);
        if (name == "e")
            return mk_const(M_E, off);

        static const std::pair<std::string_view, NodeKind> kFuncs[] = {
            {"sin", NodeKind::Sin}, {"cos", NodeKind::Cos},
            {"tan", NodeKind::Tan}, {"exp", NodeKind::Exp},
            {"log", NodeKind::Log}, {"sqrt", NodeKind::Sqrt}};
        for (const auto& [fname, kind] : kFuncs) {
            if (name == fname) {
                if (!eat('('))
                    fail("expected '(' after function name", pos_);
                NodePtr arg = parse_expr();
                if (!eat(')'))
                    fail("expected ')'", pos_);
                return mk_unary(kind, std::move(arg), off);
            }
        }

        if (name == "t") {
            Node n;
            n.kind = NodeKind::VarT;
            n.offset = off;
            return mk(n);
        }
        if (auto sym = parse_symbol(name, off))
            return sym;
        fail("unknown symbol '" + std::string(name) + "'", off);
    }

    NodePtr parse_symbol(std::string_view name, std::size_t off) {
        bool deriv = false;
        std::string_view rest = name;
        if (rest.size() >= 2 && rest.substr(0, 2) == "dx") {
            deriv = true;
            rest = rest.substr(2);
        } else if (!rest.empty() && rest[0] == 'x') {
            rest = rest.substr(1);
        } else {
            return nullptr;
        }
        int index;
        if (rest.empty()) {
            if (n_ != 1)
                fail(std::string("bare '") + (deriv ? "dx" : "x") +
                         "' requires dimension 1; use indexed symbols",
                     off);
            index = 1;
        } else {
            for (char ch : rest)
                if (!std::isdigit(static_cast<unsigned char>(ch)))
                    return nullptr;
            index = std::atoi(std::string(rest).c_str());
        }
        if (index < 1 || index > n_)
            fail("symbol index out of range 1.." + std::to_string(n_), off);
        Node n;
        n.kind = deriv ? NodeKind::VarDx : NodeKind::VarX;
        n.index = index;
        n.offset = off;
        return mk(n);
    }
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

int precedence(NodeKind k) {
    switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub:
        return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
        return 2;
    case NodeKind::Neg:
        return 3;
    case NodeKind::PowInt:
    case NodeKind::RPow:
        return 4;
    default:
        return 5;
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const NodePtr& e, int parent_prec, std::string& out) {
    int prec = precedence(e->kind);
    bool wrap = prec < parent_prec;
    if (wrap)
        out += '(';
    switch (e->kind) {
    case NodeKind::Const:
        if (e->value < 0 && !wrap && parent_prec > 0) {
            out += '(';
            out += fmt_double(e->value);
            out += ')';
        } else {
            out += fmt_double(e->value);
        }
        break;
    case NodeKind::VarT:
        out += 't';
        break;
    case NodeKind::VarX:
        out += 'x';
        out += std::to_string(e->index);
        break;
    case NodeKind::VarDx:
        out += "dx";
        out += std::to_string(e->index);
        break;
    case NodeKind::Add:
        print_node(e->a, prec, out);
        out += " + ";
        print_node(e->b, prec + 1, out);
        break;
    case NodeKind::Sub:
        print_node(e->a, prec, out);
        out += " - ";
        print_node(e->b, prec + 1, out);
        break;
    case NodeKind::Mul:
        print_node(e->a, prec, out);
        out += '*';
        print_node(e->b, prec + 1, out);
        break;
    case NodeKind::Div:
        print_node(e->a, prec, out);
        out += '/';
        print_node(e->b, prec + 1, out);
        break;
    case NodeKind::Neg:
        out += '-';
        print_node(e->a, prec + 1, out);
        break;
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Tan:
    case NodeKind::Exp:
    case NodeKind::Log:
    case NodeKind::Sqrt: {
        const char* name = e->kind == NodeKind::Sin   ? "sin"
                           : e->kind == NodeKind::Cos ? "cos"
                           : e->kind == NodeKind::Tan ? "tan"
                           : e->kind == NodeKind::Exp ? "exp"
                           : e->kind == NodeKind::Log ? "log"
                                                      : "sqrt";
        out += name;
        out += '(';
        print_node(e->a, 0, out);
        out += ')';
        break;
    }
    case NodeKind::PowInt:
        print_node(e->a, prec + 1, out);
        out += '^';
        if (e->p < 0) {
            out += '(';
            out += std::to_string(e->p);
            out += ')';
        } else {
            out += std::to_string(e->p);
        }
        break;
    case NodeKind::RPow:
        print_node(e->a, prec + 1, out);
        out += "^(";
        out += std::to_string(e->p);
        out += '/';
        out += std::to_string(e->q);
        out += ')';
        break;
    }
    if (wrap)
        out += ')';
}

bool walk_any(const NodePtr& e, NodeKind k) {
    if (!e)
        return false;
    if (e->kind == k)
        return true;
    return walk_any(e->a, k) || walk_any(e->b, k);
}

int max_dim(const Expr& a, const Expr& b) {
    return a.dimension() > b.dimension() ? a.dimension() : b.dimension();
}

} // namespace

// ---------------------------------------------------------------------------
// Expr
// ---------------------------------------------------------------------------

Expr::Expr(NodePtr root, int n)
    : root_(std::move(root)), tape_(compile_tape(root_, n)), n_(n) {}

Expr Expr::parse(std::string_view source, int dimension) {
    Parser p(source, dimension);
    return Expr(p.run(), dimension);
}

Expr Expr::constant(double c) { return Expr(mk_const(c), 0); }

Expr Expr::time_var(int dimension) {
    Node n;
    n.kind = NodeKind::VarT;
    return Expr(mk(n), dimension);
}

Expr Expr::state(int index, int dimension) {
    Node n;
    n.kind = NodeKind::VarX;
    n.index = index;
    return Expr(mk(n), dimension);
}

Expr Expr::velocity(int index, int dimension) {
    Node n;
    n.kind = NodeKind::VarDx;
    n.index = index;
    return Expr(mk(n), dimension);
}

Expr Expr::operator+(const Expr& rhs) const {
    return Expr(mk_binary(NodeKind::Add, root_, rhs.root_), max_dim(*this, rhs));
}
Expr Expr::operator-(const Expr& rhs) const {
    return Expr(mk_binary(NodeKind::Sub, root_, rhs.root_), max_dim(*this, rhs));
}
Expr Expr::operator*(const Expr& rhs) const {
    return Expr(mk_binary(NodeKind::Mul, root_, rhs.root_), max_dim(*this, rhs));
}
Expr Expr::operator/(const Expr& rhs) const {
    return Expr(mk_binary(NodeKind::Div, root_, rhs.root_), max_dim(*this, rhs));
}
Expr Expr::operator-() const { return Expr(mk_unary(NodeKind::Neg, root_), n_); }
Expr Expr::pow_int(long k) const { return Expr(mk_powi(root_, k), n_); }
Expr Expr::sin(const Expr& e) { return Expr(mk_unary(NodeKind::Sin, e.root_), e.n_); }
Expr Expr::cos(const Expr& e) { return Expr(mk_unary(NodeKind::Cos, e.root_), e.n_); }
Expr Expr::tan(const Expr& e) { return Expr(mk_unary(NodeKind::Tan, e.root_), e.n_); }
Expr Expr::exp(const Expr& e) { return Expr(mk_unary(NodeKind::Exp, e.root_), e.n_); }
Expr Expr::log(const Expr& e) { return Expr(mk_unary(NodeKind::Log, e.root_), e.n_); }
Expr Expr::sqrt(const Expr& e) { return Expr(mk_unary(NodeKind::Sqrt, e.root_), e.n_); }

std::string Expr::print() const {
    std::string out;
    print_node(root_, 0, out);
    return out;
}

bool Expr::references_state() const { return walk_any(root_, NodeKind::VarX); }
bool Expr::references_velocity() const { return walk_any(root_, NodeKind::VarDx); }
bool Expr::references_time() const { return walk_any(root_, NodeKind::VarT); }

} // namespace varmin
