#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "varmin/expr.hpp"

namespace varmin {

// Forward-mode automatic differentiation of an Expr, first and second order,
// over the m = 2n+1 variables ordered (t, x[1..n], dx[1..n]).
//
// Derivative singularities (an unbounded one-sided derivative at an isolated
// point, e.g. odd-root powers at base 0) are propagated through the
// derivative slots as IEEE inf/NaN while the value stays finite; consumers
// test the blocks they need with the *_finite() helpers. A multiplier that
// is exactly zero suppresses a singular factor (the term is absent).

struct Instr {
    NodeKind op;
    int a = -1, b = -1;
    double value = 0.0; // Const
    int index = 0;      // VarX/VarDx
    long p = 0, q = 1;  // PowInt / RPow
    std::size_t offset = Node::npos;
};

struct Tape {
    std::vector<Instr> code; // postorder; result in the last slot
    int n = 0;               // dimension
};

std::shared_ptr<const Tape> compile_tape(const NodePtr& root, int n);

// First-order jet.
struct Jet1 {
    double value = 0.0;
    double grad_t = 0.0;
    Eigen::VectorXd grad_x, grad_dx;
};

// Second-order jet. hess_xdx(i,j) = d2/dx_i d(dx_j); hess_xx and hess_dxdx
// are exactly symmetric by construction.
struct Jet2 {
    double value = 0.0;
    double grad_t = 0.0;
    Eigen::VectorXd grad_x, grad_dx;
    double hess_tt = 0.0;
    Eigen::VectorXd hess_tx, hess_tdx;
    Eigen::MatrixXd hess_xx, hess_xdx, hess_dxdx;

    bool gradient_finite() const;
    bool hess_xx_finite() const;
    bool hess_xdx_finite() const;
    bool hess_dxdx_finite() const;
};

// Zero-copy view into an Evaluator's scratch buffers after an eval call.
// Variable order: slot 0 = t, slots 1..n = x, slots n+1..2n = dx.
// The Hessian is stored as the lower triangle, index(i>=j) = i*(i+1)/2 + j.
struct JetView {
    int n = 0;
    double value = 0.0;
    const double* grad = nullptr; // m entries, null in value-only mode
    const double* hess = nullptr; // m*(m+1)/2 entries, null below jet2 mode

    int m() const { return 2 * n + 1; }
    double grad_t() const { return grad[0]; }
    double grad_x(int i) const { return grad[1 + i]; }          // 0-based
    double grad_dx(int i) const { return grad[1 + n + i]; }     // 0-based
    double hess_at(int i, int j) const {
        if (i < j) std::swap(i, j);
        return hess[i * (i + 1) / 2 + j];
    }
    double hess_tt() const { return hess_at(0, 0); }
    double hess_tx(int i) const { return hess_at(0, 1 + i); }
    double hess_tdx(int i) const { return hess_at(0, 1 + n + i); }
    double hess_xx(int i, int j) const { return hess_at(1 + i, 1 + j); }
    double hess_xdx(int i, int j) const { return hess_at(1 + i, 1 + n + j); }
    double hess_dxdx(int i, int j) const {
        return hess_at(1 + n + i, 1 + n + j);
    }
};

// Reusable evaluation scratch bound to one Expr. Not thread-safe; create one
// Evaluator per thread. The Expr itself may be shared freely.
class Evaluator {
public:
    explicit Evaluator(const Expr& e);

    double value(double t, const double* x, const double* dx);
    JetView jet1(double t, const double* x, const double* dx);
    JetView jet2(double t, const double* x, const double* dx);

    int dimension() const { return n_; }

private:
    template <int Mode> void exec(double t, const double* x, const double* dx);

    std::shared_ptr<const Tape> tape_;
    int n_ = 0, m_ = 0, mh_ = 0;
    std::vector<double> val_, grad_, hess_;
};

// Convenience single-shot evaluation (allocates a scratch per call).
double eval_value(const Expr& e, double t, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& dx);
Jet1 eval_jet1(const Expr& e, double t, const Eigen::VectorXd& x,
               const Eigen::VectorXd& dx);
Jet2 eval_jet2(const Expr& e, double t, const Eigen::VectorXd& x,
               const Eigen::VectorXd& dx);

} // namespace varmin
