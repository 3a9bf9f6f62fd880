#include "varmin/necessary.hpp"

#include "varmin/ad.hpp"
#include "varmin/errors.hpp"
#include "varmin/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace varmin {

double excess(const Expr& L, double t, const Eigen::VectorXd& x,
              const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    if (x == y && y == z)
        return 0.0;
    if (y == z)
        return 0.0;
    Evaluator ev(L);
    JetView base = ev.jet1(t, x.data(), y.data());
    double ly = base.value;
    double slope = 0.0;
    for (int i = 0; i < x.size(); ++i)
        slope += base.grad_dx(i) * (z[i] - y[i]);
    double lz = ev.value(t, x.data(), z.data());
    return lz - ly - slope;
}

EulerResidual check_euler(const Expr& L, const Trajectory& xbar, double tol) {
    const int n = xbar.dimension();
    const double t0 = xbar.t0(), t1 = xbar.t1();
    Evaluator ev(L);
    Eigen::VectorXd x(n), dx(n);

    // merged node list: uniform grid plus piece breakpoints
    const int grid_count = 512;
    std::vector<double> nodes;
    for (int i = 0; i <= grid_count; ++i)
        nodes.push_back(t0 + (t1 - t0) * i / grid_count);
    for (double b : xbar.breakpoints())
        nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<double> piece_ends;
    for (double b : xbar.breakpoints())
        piece_ends.push_back(b);
    piece_ends.push_back(t1);

    // cumulative integral of L_x by one Kronrod panel per cell (cells never
    // straddle a breakpoint, so the integrand is smooth on each)
    struct Sample {
        double t;
        int side;
        Eigen::VectorXd g;
        std::size_t piece;
    };
    std::vector<Sample> samples;
    Eigen::VectorXd cum = Eigen::VectorXd::Zero(n);
    std::size_t piece = 0;

    auto lx_at = [&](double t) {
        xbar.eval(t, kAuto, x, dx);
        JetView j = ev.jet1(t, x.data(), dx.data());
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i)
            g[i] = j.grad_x(i);
        return g;
    };
    auto ldx_at = [&](double t, int side) {
        xbar.eval(t, side, x, dx);
        JetView j = ev.jet1(t, x.data(), dx.data());
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i)
            g[i] = j.grad_dx(i);
        return g;
    };

    auto is_breakpoint = [&](double t) {
        return std::binary_search(xbar.breakpoints().begin(),
                                  xbar.breakpoints().end(), t);
    };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double t = nodes[i];
        if (i > 0) {
            // 15-point Kronrod panel over [nodes[i-1], t]
            double a = nodes[i - 1], c = 0.5 * (a + t), h = 0.5 * (t - a);
            static const double xk[8] = {
                0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                0.207784955007898468, 0.0};
            static const double wk[8] = {
                0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                0.204432940075298892, 0.209482141084727828};
            Eigen::VectorXd acc = wk[7] * lx_at(c);
            for (int k = 0; k < 7; ++k)
                acc += wk[k] * (lx_at(c - h * xk[k]) + lx_at(c + h * xk[k]));
            cum += h * acc;
        }
        if (t == t0) {
            samples.push_back({t, kRight, ldx_at(t, kRight) - cum, piece});
        } else if (t == t1) {
            samples.push_back({t, kLeft, ldx_at(t, kLeft) - cum, piece});
        } else if (is_breakpoint(t)) {
            samples.push_back({t, kLeft, ldx_at(t, kLeft) - cum, piece});
            ++piece;
            samples.push_back({t, kRight, ldx_at(t, kRight) - cum, piece});
        } else {
            samples.push_back({t, kAuto, ldx_at(t, kAuto) - cum, piece});
        }
    }

    EulerResidual res;
    res.tol = tol;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (const auto& s : samples)
        mean += s.g;
    mean /= double(samples.size());
    res.c_estimate = mean;
    res.per_piece_deviation.assign(xbar.piece_count(), 0.0);
    for (const auto& s : samples) {
        double dev = (s.g - mean).norm();
        res.max_deviation = std::max(res.max_deviation, dev);
        if (s.piece < res.per_piece_deviation.size())
            res.per_piece_deviation[s.piece] =
                std::max(res.per_piece_deviation[s.piece], dev);
    }
    res.verdict = res.max_deviation <= tol * (1.0 + mean.norm())
                      ? Verdict::HOLDS
                      : Verdict::FAILS;
    return res;
}

ConditionReport check_weierstrass_erdmann(const Expr& L,
                                          const Trajectory& xbar, double tol) {
    ConditionReport rep;
    rep.condition = "weierstrass_erdmann";
    const auto& corners = xbar.corner_set();
    if (corners.empty()) {
        rep.verdict = Verdict::HOLDS;
        rep.worst_margin = 0.0;
        rep.note = "no corners";
        return rep;
    }
    const int n = xbar.dimension();
    Evaluator ev(L);
    Eigen::VectorXd x(n), dx(n);
    double worst = 0.0; // largest normalized mismatch
    std::optional<Witness> witness;
    for (double tau : corners) {
        Eigen::VectorXd pL(n), pR(n);
        double hL = 0.0, hR = 0.0; // L - dx^T L_dx on each side
        double scale = 1.0;
        for (int side : {kLeft, kRight}) {
            xbar.eval(tau, side, x, dx);
            JetView j = ev.jet1(tau, x.data(), dx.data());
            Eigen::VectorXd p(n);
            for (int i = 0; i < n; ++i)
                p[i] = j.grad_dx(i);
            double h = j.value - dx.dot(p);
            scale = std::max({scale, p.norm(), std::fabs(h)});
            if (side == kLeft) {
                pL = p;
                hL = h;
            } else {
                pR = p;
                hR = h;
            }
        }
        double mismatch =
            std::max((pL - pR).norm(), std::fabs(hL - hR)) / scale;
        if (mismatch > worst) {
            worst = mismatch;
            Witness w;
            w.t = tau;
            witness = w;
        }
    }
    rep.worst_margin = -worst;
    if (worst <= tol) {
        rep.verdict = Verdict::HOLDS;
    } else if (worst > std::max(100.0 * tol, 1e-7)) {
        rep.verdict = Verdict::FAILS;
        rep.witness = witness;
    } else {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.witness = witness;
    }
    return rep;
}

ConditionReport check_legendre(const Expr& L, const Trajectory& xbar,
                               const SamplingPlan& plan) {
    ConditionReport rep;
    rep.condition = "legendre";
    rep.plan_digest = plan.digest();
    const int n = xbar.dimension();
    Evaluator ev(L);
    Eigen::VectorXd x(n), dx(n);
    Eigen::MatrixXd H(n, n);

    double worst = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;
    int degenerate = 0;

    for (const auto& node : plan.t_nodes) {
        xbar.eval(node.t, node.side, x, dx);
        JetView j = ev.jet2(node.t, x.data(), dx.data());
        bool finite = true;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                H(r, c) = j.hess_dxdx(r, c);
                finite = finite && std::isfinite(H(r, c));
            }
        if (!finite)
            throw NumericError("DERIVATIVE_SINGULAR",
                               "second derivative in dx is unbounded here",
                               node.t);
        double lam;
        if (n == 1) {
            lam = H(0, 0);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            lam = es.eigenvalues().minCoeff();
        }
        double margin = lam / std::max(1.0, H.norm());
        if (std::fabs(lam) <= plan.pass_tol) {
            ++degenerate;
            if (rep.degenerate_points.size() < 16)
                rep.degenerate_points.push_back(node.t);
        }
        if (margin < worst) {
            worst = margin;
            Witness w;
            w.t = node.t;
            w.side = node.side;
            witness = w;
        }
    }
    rep.worst_margin = worst;
    if (worst >= -plan.pass_tol)
        rep.verdict = Verdict::HOLDS;
    else if (worst < -plan.fail_tol) {
        rep.verdict = Verdict::FAILS;
        rep.witness = witness;
    } else {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.witness = witness;
    }
    if (degenerate > 0)
        rep.note = "degenerate at " + std::to_string(degenerate) +
                   " of " + std::to_string(plan.t_nodes.size()) + " nodes";
    return rep;
}

ConditionReport check_weierstrass(const Expr& L, const Trajectory& xbar,
                                  const SamplingPlan& plan,
                                  WeierstrassTier tier) {
    ConditionReport rep;
    rep.condition = tier == WeierstrassTier::LOCAL ? "weierstrass_local"
                                                   : "weierstrass_global";
    rep.plan_digest = plan.digest();
    const int n = xbar.dimension();
    const double radius =
        tier == WeierstrassTier::LOCAL ? plan.delta : plan.r_global();
    Evaluator ev(L);
    Eigen::VectorXd x(n), dx(n), z(n);

    double worst = std::numeric_limits<double>::infinity();
    std::optional<Witness> witness;

    for (const auto& node : plan.t_nodes) {
        xbar.eval(node.t, node.side, x, dx);
        JetView base = ev.jet1(node.t, x.data(), dx.data());
        double ly = base.value;
        Eigen::VectorXd ldx(n);
        for (int i = 0; i < n; ++i)
            ldx[i] = base.grad_dx(i);
        for (std::size_t s = 0; s < plan.xi.points.size(); ++s) {
            if (plan.xi.norms[s] > radius + 1e-15)
                continue;
            const Eigen::VectorXd& xi = plan.xi.points[s];
            z = dx + xi;
            double lz = ev.value(node.t, x.data(), z.data());
            double lin = ldx.dot(xi);
            double e = lz - ly - lin;
            double scale =
                std::max({1.0, std::fabs(lz), std::fabs(ly), std::fabs(lin)});
            double margin = e / scale;
            if (margin < worst) {
                worst = margin;
                Witness w;
                w.t = node.t;
                w.side = node.side;
                w.xi = xi;
                witness = w;
            }
        }
    }
    rep.worst_margin = worst;
    if (worst >= -plan.pass_tol) {
        rep.verdict = Verdict::HOLDS;
        if (tier == WeierstrassTier::GLOBAL)
            rep.note = "no counterexample up to radius " +
                       std::to_string(radius);
    } else if (worst < -plan.fail_tol) {
        rep.verdict = Verdict::FAILS;
        rep.witness = witness;
    } else {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.witness = witness;
    }
    return rep;
}

} // namespace varmin
