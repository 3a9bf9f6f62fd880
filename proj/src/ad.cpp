#include "varmin/ad.hpp"

#include <limits>

namespace varmin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Singularity-suppressing product: an exactly-zero multiplier means the term
// is absent, so it must kill an inf/NaN coming from a singular derivative
// coefficient rather than poison the slot.
inline double sm(double a, double b) {
    if (a == 0.0 || b == 0.0)
        return 0.0;
    return a * b;
}

// x^e with the 0-base convention used for derivative coefficients:
// 0^e = 0 for e > 0, 1 for e == 0, +inf (singular marker) for e < 0.
inline double powz(double x, long e) {
    if (x == 0.0)
        return e > 0 ? 0.0 : (e == 0 ? 1.0 : kInf);
    return std::pow(x, static_cast<double>(e));
}

// Real odd-root power value: (q-th real root of x)^p, q odd positive.
inline double rpow_val(double x, long p, long q) {
    if (x == 0.0)
        return p > 0 ? 0.0 : (p == 0 ? 1.0 : kInf);
    double mag = std::pow(std::fabs(x), static_cast<double>(p) / static_cast<double>(q));
    bool negative = x < 0.0 && (p % 2 != 0);
    return negative ? -mag : mag;
}

void emit(const NodePtr& e, Tape& tape) {
    int ia = -1, ib = -1;
    if (e->a) {
        emit(e->a, tape);
        ia = static_cast<int>(tape.code.size()) - 1;
    }
    if (e->b) {
        emit(e->b, tape);
        ib = static_cast<int>(tape.code.size()) - 1;
    }
    Instr ins;
    ins.op = e->kind;
    ins.a = ia;
    ins.b = ib;
    ins.value = e->value;
    ins.index = e->index;
    ins.p = e->p;
    ins.q = e->q;
    ins.offset = e->offset;
    tape.code.push_back(ins);
}

} // namespace

std::shared_ptr<const Tape> compile_tape(const NodePtr& root, int n) {
    if (!root)
        return nullptr;
    auto tape = std::make_shared<Tape>();
    tape->n = n;
    emit(root, *tape);
    return tape;
}

bool Jet2::gradient_finite() const {
    return std::isfinite(grad_t) && grad_x.allFinite() && grad_dx.allFinite();
}
bool Jet2::hess_xx_finite() const { return hess_xx.allFinite(); }
bool Jet2::hess_xdx_finite() const { return hess_xdx.allFinite(); }
bool Jet2::hess_dxdx_finite() const { return hess_dxdx.allFinite(); }

Evaluator::Evaluator(const Expr& e) : tape_(e.tape()), n_(e.dimension()) {
    m_ = 2 * n_ + 1;
    mh_ = m_ * (m_ + 1) / 2;
    const std::size_t k = tape_->code.size();
    val_.resize(k);
    grad_.resize(k * m_);
    hess_.resize(k * mh_);
}

template <int Mode>
void Evaluator::exec(double t, const double* x, const double* dx) {
    const auto& code = tape_->code;
    const int m = m_, mh = mh_;
    double* V = val_.data();
    double* G = grad_.data();
    double* H = hess_.data();

    for (std::size_t i = 0; i < code.size(); ++i) {
        const Instr& ins = code[i];
        double* g = G + i * m;
        double* h = H + i * mh;
        const double* ga = ins.a >= 0 ? G + std::size_t(ins.a) * m : nullptr;
        const double* gb = ins.b >= 0 ? G + std::size_t(ins.b) * m : nullptr;
        const double* ha = ins.a >= 0 ? H + std::size_t(ins.a) * mh : nullptr;
        const double* hb = ins.b >= 0 ? H + std::size_t(ins.b) * mh : nullptr;
        const double va = ins.a >= 0 ? V[ins.a] : 0.0;
        const double vb = ins.b >= 0 ? V[ins.b] : 0.0;

        auto set_leaf = [&](double v, int slot) {
            V[i] = v;
            if constexpr (Mode >= 1) {
                for (int k = 0; k < m; ++k)
                    g[k] = 0.0;
                if (slot >= 0)
                    g[slot] = 1.0;
            }
            if constexpr (Mode >= 2) {
                for (int k = 0; k < mh; ++k)
                    h[k] = 0.0;
            }
        };

        // Unary chain rule with local derivative coefficients f1, f2.
        auto chain1 = [&](double v, double f1, double f2) {
            V[i] = v;
            if constexpr (Mode >= 1) {
                for (int k = 0; k < m; ++k)
                    g[k] = sm(f1, ga[k]);
            }
            if constexpr (Mode >= 2) {
                int idx = 0;
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c <= r; ++c, ++idx)
                        h[idx] = sm(f2, sm(ga[r], ga[c])) + sm(f1, ha[idx]);
            }
        };

        switch (ins.op) {
        case NodeKind::Const:
            set_leaf(ins.value, -1);
            break;
        case NodeKind::VarT:
            set_leaf(t, 0);
            break;
        case NodeKind::VarX:
            set_leaf(x[ins.index - 1], ins.index);
            break;
        case NodeKind::VarDx:
            set_leaf(dx[ins.index - 1], n_ + ins.index);
            break;
        case NodeKind::Add:
            V[i] = va + vb;
            if constexpr (Mode >= 1)
                for (int k = 0; k < m; ++k)
                    g[k] = ga[k] + gb[k];
            if constexpr (Mode >= 2)
                for (int k = 0; k < mh; ++k)
                    h[k] = ha[k] + hb[k];
            break;
        case NodeKind::Sub:
            V[i] = va - vb;
            if constexpr (Mode >= 1)
                for (int k = 0; k < m; ++k)
                    g[k] = ga[k] - gb[k];
            if constexpr (Mode >= 2)
                for (int k = 0; k < mh; ++k)
                    h[k] = ha[k] - hb[k];
            break;
        case NodeKind::Neg:
            V[i] = -va;
            if constexpr (Mode >= 1)
                for (int k = 0; k < m; ++k)
                    g[k] = -ga[k];
            if constexpr (Mode >= 2)
                for (int k = 0; k < mh; ++k)
                    h[k] = -ha[k];
            break;
        case NodeKind::Mul:
            V[i] = va * vb;
            if constexpr (Mode >= 1)
                for (int k = 0; k < m; ++k)
                    g[k] = sm(va, gb[k]) + sm(vb, ga[k]);
            if constexpr (Mode >= 2) {
                int idx = 0;
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c <= r; ++c, ++idx)
                        h[idx] = sm(va, hb[idx]) + sm(vb, ha[idx]) +
                                 sm(ga[r], gb[c]) + sm(ga[c], gb[r]);
            }
            break;
        case NodeKind::Div: {
            if (vb == 0.0)
                throw EvalDomainError("division", vb);
            const double w = 1.0 / vb;
            const double vr = va * w;
            V[i] = vr;
            if constexpr (Mode >= 1)
                for (int k = 0; k < m; ++k)
                    g[k] = (ga[k] - sm(vr, gb[k])) * w;
            if constexpr (Mode >= 2) {
                int idx = 0;
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c <= r; ++c, ++idx)
                        h[idx] = (ha[idx] - sm(vr, hb[idx]) - sm(g[r], gb[c]) -
                                  sm(g[c], gb[r])) *
                                 w;
            }
            break;
        }
        case NodeKind::Sin:
            chain1(std::sin(va), std::cos(va), -std::sin(va));
            break;
        case NodeKind::Cos:
            chain1(std::cos(va), -std::sin(va), -std::cos(va));
            break;
        case NodeKind::Tan: {
            const double u = std::tan(va);
            const double s2 = 1.0 + u * u;
            chain1(u, s2, 2.0 * u * s2);
            break;
        }
        case NodeKind::Exp: {
            const double u = std::exp(va);
            chain1(u, u, u);
            break;
        }
        case NodeKind::Log:
            if (va <= 0.0)
                throw EvalDomainError("log", va);
            chain1(std::log(va), 1.0 / va, -1.0 / (va * va));
            break;
        case NodeKind::Sqrt: {
            if (va < 0.0)
                throw EvalDomainError("sqrt", va);
            if (va == 0.0) {
                chain1(0.0, kInf, -kInf); // derivative singular at 0
                break;
            }
            const double u = std::sqrt(va);
            chain1(u, 0.5 / u, -0.25 / (va * u));
            break;
        }
        case NodeKind::PowInt: {
            const long p = ins.p;
            if (va == 0.0 && p < 0)
                throw EvalDomainError("integer power with negative exponent", va);
            const double v = powz(va, p);
            const double f1 = p == 0 ? 0.0 : double(p) * powz(va, p - 1);
            const double f2 =
                (p == 0 || p == 1) ? 0.0 : double(p) * double(p - 1) * powz(va, p - 2);
            chain1(v, f1, f2);
            break;
        }
        case NodeKind::RPow: {
            const long p = ins.p, q = ins.q;
            if (va == 0.0 && p < 0)
                throw EvalDomainError("rational power with negative exponent", va);
            const double v = rpow_val(va, p, q);
            const double r1 = double(p) / double(q);
            const double f1 = p == 0 ? 0.0 : r1 * rpow_val(va, p - q, q);
            const double f2 =
                p == 0 ? 0.0 : r1 * (double(p - q) / double(q)) * rpow_val(va, p - 2 * q, q);
            chain1(v, f1, f2);
            break;
        }
        }
    }
}

double Evaluator::value(double t, const double* x, const double* dx) {
    exec<0>(t, x, dx);
    return val_.back();
}

JetView Evaluator::jet1(double t, const double* x, const double* dx) {
    exec<1>(t, x, dx);
    JetView v;
    v.n = n_;
    v.value = val_.back();
    v.grad = grad_.data() + (val_.size() - 1) * m_;
    return v;
}

JetView Evaluator::jet2(double t, const double* x, const double* dx) {
    exec<2>(t, x, dx);
    JetView v;
    v.n = n_;
    v.value = val_.back();
    v.grad = grad_.data() + (val_.size() - 1) * m_;
    v.hess = hess_.data() + (val_.size() - 1) * mh_;
    return v;
}

double eval_value(const Expr& e, double t, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& dx) {
    Evaluator ev(e);
    return ev.value(t, x.data(), dx.data());
}

Jet1 eval_jet1(const Expr& e, double t, const Eigen::VectorXd& x,
               const Eigen::VectorXd& dx) {
    Evaluator ev(e);
    JetView v = ev.jet1(t, x.data(), dx.data());
    Jet1 out;
    const int n = e.dimension();
    out.value = v.value;
    out.grad_t = v.grad_t();
    out.grad_x.resize(n);
    out.grad_dx.resize(n);
    for (int i = 0; i < n; ++i) {
        out.grad_x[i] = v.grad_x(i);
        out.grad_dx[i] = v.grad_dx(i);
    }
    return out;
}

Jet2 eval_jet2(const Expr& e, double t, const Eigen::VectorXd& x,
               const Eigen::VectorXd& dx) {
    Evaluator ev(e);
    JetView v = ev.jet2(t, x.data(), dx.data());
    Jet2 out;
    const int n = e.dimension();
    out.value = v.value;
    out.grad_t = v.grad_t();
    out.grad_x.resize(n);
    out.grad_dx.resize(n);
    out.hess_tx.resize(n);
    out.hess_tdx.resize(n);
    out.hess_xx.resize(n, n);
    out.hess_xdx.resize(n, n);
    out.hess_dxdx.resize(n, n);
    out.hess_tt = v.hess_tt();
    for (int i = 0; i < n; ++i) {
        out.grad_x[i] = v.grad_x(i);
        out.grad_dx[i] = v.grad_dx(i);
        out.hess_tx[i] = v.hess_tx(i);
        out.hess_tdx[i] = v.hess_tdx(i);
        for (int j = 0; j < n; ++j) {
            out.hess_xx(i, j) = v.hess_xx(i, j);
            out.hess_xdx(i, j) = v.hess_xdx(i, j);
            out.hess_dxdx(i, j) = v.hess_dxdx(i, j);
        }
    }
    return out;
}

} // namespace varmin
