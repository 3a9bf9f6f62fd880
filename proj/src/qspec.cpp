#include "varmin/qspec.hpp"

#include "varmin/ad.hpp"
#include "varmin/errors.hpp"
#include "varmin/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace varmin {

namespace {

constexpr double kSymtol = 1e-10;

void check_symmetry(const Eigen::MatrixXd& Q, double t) {
    double defect = (Q - Q.transpose()).norm();
    if (defect > kSymtol * std::max(1.0, Q.norm()))
        throw NumericError("NONSYMMETRIC_Q", "Q(t) is not symmetric", t);
}

} // namespace

QSpec QSpec::zero(int n, double t0, double t1) {
    QSpec q;
    q.kind_ = QKind::ZERO;
    q.n_ = n;
    q.t0_ = t0;
    q.t1_ = t1;
    return q;
}

QSpec QSpec::from_exprs(std::vector<std::vector<Expr>> entries, double t0,
                        double t1) {
    QSpec q;
    q.kind_ = QKind::EXPR;
    q.n_ = static_cast<int>(entries.size());
    q.t0_ = t0;
    q.t1_ = t1;
    for (const auto& row : entries)
        if (static_cast<int>(row.size()) != q.n_)
            throw NumericError("BAD_ARGUMENT", "Q entries must be square");
    q.entries_ = std::move(entries);
    // validate symmetry on an interior sample grid
    Eigen::MatrixXd Q(q.n_, q.n_), Qd(q.n_, q.n_);
    for (int i = 1; i <= 8; ++i) {
        double t = t0 + (t1 - t0) * i / 9.5;
        q.eval(t, Q, Qd);
    }
    return q;
}

QSpec QSpec::from_riccati(RiccatiGridData grid, double t0, double t1) {
    if (grid.ts.size() < 2 || grid.ts.size() != grid.q.size() ||
        grid.ts.size() != grid.qdot.size())
        throw NumericError("BAD_ARGUMENT", "malformed Riccati grid");
    QSpec q;
    q.kind_ = QKind::RICCATI_SOLUTION;
    q.n_ = static_cast<int>(grid.q.front().rows());
    q.t0_ = t0;
    q.t1_ = t1;
    q.grid_ = std::move(grid);
    return q;
}

double QSpec::max_t() const {
    return kind_ == QKind::RICCATI_SOLUTION ? grid_.ts.back() : t1_;
}

void QSpec::eval(double t, Eigen::MatrixXd& Q, Eigen::MatrixXd& Qdot) const {
    Q.resize(n_, n_);
    Qdot.resize(n_, n_);
    switch (kind_) {
    case QKind::ZERO:
        Q.setZero();
        Qdot.setZero();
        return;
    case QKind::EXPR: {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                Evaluator ev(entries_[i][j]);
                JetView jv = ev.jet1(t, nullptr, nullptr);
                Q(i, j) = jv.value;
                Qdot(i, j) = jv.grad_t();
            }
        check_symmetry(Q, t);
        Q = 0.5 * (Q + Q.transpose()).eval();
        Qdot = 0.5 * (Qdot + Qdot.transpose()).eval();
        return;
    }
    case QKind::RICCATI_SOLUTION: {
        const auto& ts = grid_.ts;
        if (t < ts.front() - 1e-12 || t > ts.back())
            throw NumericError("Q_RANGE",
                               "Q solution grid does not cover this time", t);
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        std::size_t k = it == ts.begin()
                            ? 0
                            : std::min<std::size_t>(ts.size() - 2,
                                                    (it - ts.begin()) - 1);
        double ta = ts[k], tb = ts[k + 1], h = tb - ta;
        double s = (t - ta) / h;
        double s2 = s * s, s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        Q = h00 * grid_.q[k] + h * h10 * grid_.qdot[k] + h01 * grid_.q[k + 1] +
            h * h11 * grid_.qdot[k + 1];
        Q = 0.5 * (Q + Q.transpose()).eval();
        if (grid_.rhs) {
            Qdot = grid_.rhs(t, Q);
        } else {
            double d00 = (6 * s2 - 6 * s) / h, d10 = (3 * s2 - 4 * s + 1);
            double d01 = (6 * s - 6 * s2) / h, d11 = (3 * s2 - 2 * s);
            Qdot = d00 * grid_.q[k] + d10 * grid_.qdot[k] +
                   d01 * grid_.q[k + 1] + d11 * grid_.qdot[k + 1];
        }
        Qdot = 0.5 * (Qdot + Qdot.transpose()).eval();
        return;
    }
    }
}

std::string QSpec::digest() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case QKind::ZERO:
        return "q:zero";
    case QKind::EXPR:
        os << "q:expr:";
        for (const auto& row : entries_)
            for (const auto& e : row)
                os << e.print() << ';';
        break;
    case QKind::RICCATI_SOLUTION:
        os << "q:riccati:" << grid_.ts.size() << ':' << grid_.ts.back() << ':'
           << grid_.q.back().norm();
        break;
    }
    return hex64(fnv1a(os.str()));
}

} // namespace varmin
