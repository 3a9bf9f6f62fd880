#include "varmin/trajectory.hpp"

#include "varmin/ad.hpp"
#include "varmin/detail/rng.hpp"
#include "varmin/errors.hpp"

#include <algorithm>
#include <cmath>

namespace varmin {

namespace {

constexpr double kContinuityTol = 1e-10;
constexpr double kCornerTol = 1e-8;
constexpr double kTilingTol = 1e-12;

// Value and d/dt of an Expr over t only (dimension 0).
void eval_scalar(const Expr& e, double t, double& value, double& deriv) {
    Evaluator ev(e);
    JetView j = ev.jet1(t, nullptr, nullptr);
    value = j.value;
    deriv = j.grad_t();
}

// Quintic Hermite basis and its derivative on s in [0,1].
void quintic(double s, double out_p[6], double out_d[6]) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    out_p[0] = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    out_p[1] = s - 6 * s3 + 8 * s4 - 3 * s5;
    out_p[2] = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    out_p[3] = 10 * s3 - 15 * s4 + 6 * s5;
    out_p[4] = -4 * s3 + 7 * s4 - 3 * s5;
    out_p[5] = 0.5 * (s3 - 2 * s4 + s5);
    out_d[0] = -30 * s2 + 60 * s3 - 30 * s4;
    out_d[1] = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    out_d[2] = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4);
    out_d[3] = 30 * s2 - 60 * s3 + 30 * s4;
    out_d[4] = -12 * s2 + 28 * s3 - 15 * s4;
    out_d[5] = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);
}

} // namespace

Trajectory Trajectory::from_pieces(int n, double t0, double t1,
                                   std::vector<ExprPiece> pieces) {
    Trajectory tr;
    tr.n_ = n;
    tr.t0_ = t0;
    tr.t1_ = t1;
    for (auto& p : pieces)
        tr.pieces_.emplace_back(std::move(p));
    tr.validate_and_finish();
    return tr;
}

Trajectory Trajectory::single(int n, double t0, double t1,
                              std::vector<Expr> comps) {
    ExprPiece p;
    p.a = t0;
    p.b = t1;
    p.comps = std::move(comps);
    std::vector<ExprPiece> pieces;
    pieces.push_back(std::move(p));
    return from_pieces(n, t0, t1, std::move(pieces));
}

Trajectory Trajectory::from_spline(int n, SplinePiece spline) {
    Trajectory tr;
    tr.n_ = n;
    tr.t0_ = spline.a;
    tr.t1_ = spline.b;
    tr.pieces_.emplace_back(std::move(spline));
    tr.validate_and_finish();
    return tr;
}

std::pair<double, double> Trajectory::piece_bounds(std::size_t i) const {
    return std::visit([](const auto& p) { return std::make_pair(p.a, p.b); },
                      pieces_[i]);
}

void Trajectory::validate_and_finish() {
    if (pieces_.empty())
        throw NumericError("BAD_TRAJECTORY", "no pieces");
    const double span = t1_ - t0_;
    if (!(span > 0))
        throw NumericError("BAD_TRAJECTORY", "empty interval");

    double prev_b = t0_;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        auto [a, b] = piece_bounds(i);
        if (!(b > a))
            throw NumericError("BAD_TRAJECTORY", "piece with empty domain", a);
        if (std::fabs(a - prev_b) > kTilingTol * std::max(1.0, span))
            throw NumericError("BAD_TRAJECTORY",
                               "pieces do not tile the interval", a);
        if (const auto* ep = std::get_if<ExprPiece>(&pieces_[i])) {
            if (static_cast<int>(ep->comps.size()) != n_)
                throw NumericError("BAD_TRAJECTORY",
                                   "piece component count != dimension", a);
        } else {
            const auto& sp = std::get<SplinePiece>(pieces_[i]);
            if (sp.ts.size() < 2 || sp.x.cols() != n_ ||
                sp.x.rows() != static_cast<Eigen::Index>(sp.ts.size()))
                throw NumericError("BAD_TRAJECTORY", "malformed spline piece", a);
        }
        prev_b = b;
        if (i + 1 < pieces_.size())
            breakpoints_.push_back(b);
    }
    if (std::fabs(prev_b - t1_) > kTilingTol * std::max(1.0, span))
        throw NumericError("BAD_TRAJECTORY", "pieces do not reach t1", prev_b);

    // continuity and corner detection at shared breakpoints
    Eigen::VectorXd xl(n_), dl(n_), xr(n_), dr(n_);
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
        double tb = piece_bounds(i).second;
        eval_piece(pieces_[i], tb, xl, dl);
        eval_piece(pieces_[i + 1], tb, xr, dr);
        if ((xl - xr).norm() > kContinuityTol)
            throw NumericError("BAD_TRAJECTORY",
                               "value discontinuity at breakpoint", tb);
        if (!dl.allFinite() || !dr.allFinite())
            throw NumericError("BAD_TRAJECTORY",
                               "one-sided derivative not finite", tb);
        if ((dl - dr).norm() > kCornerTol)
            corners_.push_back(tb);
    }
}

std::size_t Trajectory::piece_index(double t, int side) const {
    const double span = t1_ - t0_;
    if (t < t0_ - 1e-12 * std::max(1.0, span) ||
        t > t1_ + 1e-12 * std::max(1.0, span))
        throw NumericError("T_OUT_OF_RANGE", "evaluation outside interval", t);
    if (side == kAuto)
        side = (t >= t1_) ? kLeft : kRight;
    // pick the piece whose half-open side contains t
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        auto [a, b] = piece_bounds(i);
        bool inside = side == kLeft ? (t > a && t <= b) : (t >= a && t < b);
        if (inside || (i + 1 == pieces_.size() && t >= b))
            return i;
    }
    return 0;
}

void Trajectory::eval_piece(const Piece& p, double t, Eigen::VectorXd& x,
                            Eigen::VectorXd& dx) const {
    x.resize(n_);
    dx.resize(n_);
    if (const auto* ep = std::get_if<ExprPiece>(&p)) {
        for (int i = 0; i < n_; ++i)
            eval_scalar(ep->comps[i], t, x[i], dx[i]);
        return;
    }
    const auto& sp = std::get<SplinePiece>(p);
    const std::size_t m = sp.ts.size();
    double tc = std::clamp(t, sp.a, sp.b);
    // uniform nodes: direct index
    double h = (sp.b - sp.a) / double(m - 1);
    std::size_t k = std::min<std::size_t>(
        m - 2, static_cast<std::size_t>(std::max(0.0, (tc - sp.a) / h)));
    double ta = sp.ts[k], tb = sp.ts[k + 1];
    double hk = tb - ta;
    double s = (tc - ta) / hk;
    double bp[6], bd[6];
    quintic(s, bp, bd);
    for (int c = 0; c < n_; ++c) {
        double p0 = sp.x(k, c), v0 = sp.v(k, c), a0 = sp.acc(k, c);
        double p1 = sp.x(k + 1, c), v1 = sp.v(k + 1, c), a1 = sp.acc(k + 1, c);
        x[c] = p0 * bp[0] + hk * v0 * bp[1] + hk * hk * a0 * bp[2] +
               p1 * bp[3] + hk * v1 * bp[4] + hk * hk * a1 * bp[5];
        dx[c] = (p0 * bd[0] + hk * v0 * bd[1] + hk * hk * a0 * bd[2] +
                 p1 * bd[3] + hk * v1 * bd[4] + hk * hk * a1 * bd[5]) /
                hk;
    }
}

void Trajectory::eval(double t, int side, Eigen::VectorXd& x,
                      Eigen::VectorXd& dx) const {
    eval_piece(pieces_[piece_index(t, side)], t, x, dx);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Trajectory::eval(double t,
                                                             int side) const {
    Eigen::VectorXd x, dx;
    eval(t, side, x, dx);
    return {std::move(x), std::move(dx)};
}

void Perturbation::eval(double t, Eigen::VectorXd& dx_val,
                        Eigen::VectorXd& ddx_val) const {
    base_.eval(t, kAuto, dx_val, ddx_val);
    if (t == base_.t0() || t == base_.t1())
        dx_val.setZero();
    dx_val *= scale_;
    ddx_val *= scale_;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Perturbation::eval(double t) const {
    Eigen::VectorXd v, d;
    eval(t, v, d);
    return {std::move(v), std::move(d)};
}

Perturbation make_bump_perturbation(int n, double t0, double t1,
                                    std::uint64_t seed, int k) {
    if (k < 1)
        throw NumericError("BAD_ARGUMENT", "mode count must be >= 1");
    detail::Rng rng(seed ^ 0xb0b5eed5);
    const double span = t1 - t0;
    std::vector<std::vector<double>> coeff(n, std::vector<double>(k));
    for (int c = 0; c < n; ++c)
        for (int j = 0; j < k; ++j)
            coeff[c][j] = rng.uniform(-1.0, 1.0);

    // sup-normalize over a dense grid
    double sup = 0.0;
    const int grid = 2048;
    for (int g = 0; g <= grid; ++g) {
        double t = t0 + span * g / grid;
        for (int c = 0; c < n; ++c) {
            double v = 0.0;
            for (int j = 0; j < k; ++j)
                v += coeff[c][j] * std::sin((j + 1) * M_PI * (t - t0) / span);
            sup = std::max(sup, std::fabs(v));
        }
    }
    if (sup == 0.0)
        sup = 1.0;

    std::vector<Expr> comps;
    Expr tvar = Expr::time_var();
    Expr phase = (tvar - Expr::constant(t0));
    for (int c = 0; c < n; ++c) {
        Expr sum = Expr::constant(0.0);
        for (int j = 0; j < k; ++j) {
            Expr arg = Expr::constant((j + 1) * M_PI / span) * phase;
            sum = sum + Expr::constant(coeff[c][j] / sup) * Expr::sin(arg);
        }
        comps.push_back(sum);
    }
    return Perturbation(Trajectory::single(n, t0, t1, std::move(comps)), 1.0);
}

} // namespace varmin
