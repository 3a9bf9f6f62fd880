#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "varmin/expr.hpp"

namespace varmin {

// Symmetric n-by-n matrix weight Q(t) on [t0, t1), used by the certificate
// checks and by the augmented increment identity. Three backings:
//   ZERO              identically zero,
//   EXPR              closed-form entries in t,
//   RICCATI_SOLUTION  dense integration grid with cubic Hermite
//                     interpolation; Qdot comes from the stored right-hand
//                     side evaluated at the interpolated Q, so the pair
//                     (Q, Qdot) satisfies the generating ODE exactly.
enum class QKind { ZERO, EXPR, RICCATI_SOLUTION };

struct RiccatiGridData {
    std::vector<double> ts; // strictly increasing, ts.front() == t0
    std::vector<Eigen::MatrixXd> q;
    std::vector<Eigen::MatrixXd> qdot;
    std::function<Eigen::MatrixXd(double, const Eigen::MatrixXd&)> rhs;
};

class QSpec {
public:
    QSpec() = default;

    static QSpec zero(int n, double t0, double t1);
    // entries[i][j] over t only; validated symmetric on a sample grid.
    static QSpec from_exprs(std::vector<std::vector<Expr>> entries, double t0,
                            double t1);
    static QSpec from_riccati(RiccatiGridData grid, double t0, double t1);

    QKind kind() const { return kind_; }
    int dimension() const { return n_; }
    bool is_zero() const { return kind_ == QKind::ZERO; }
    double t0() const { return t0_; }
    double t1() const { return t1_; }
    // Largest t at which eval() is defined (t1 for ZERO/EXPR, the reached
    // integration time for RICCATI_SOLUTION).
    double max_t() const;

    // Q(t) and its derivative; Q is symmetrized, and a symmetry defect above
    // 1e-10 raises NumericError("NONSYMMETRIC_Q"). Evaluation past max_t()
    // raises NumericError("Q_RANGE").
    void eval(double t, Eigen::MatrixXd& Q, Eigen::MatrixXd& Qdot) const;

    std::string digest() const;

private:
    QKind kind_ = QKind::ZERO;
    int n_ = 0;
    double t0_ = 0.0, t1_ = 1.0;
    std::vector<std::vector<Expr>> entries_;
    RiccatiGridData grid_;
};

} // namespace varmin
