#include "varmin/sufficiency.hpp"

#include "varmin/ad.hpp"
#include "varmin/errors.hpp"
#include "varmin/necessary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varmin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Radius-bucketed minimum table over (xi, eta) sample norms. Tier margins
// and the delta sweep are prefix minima over the cells.
struct BucketTable {
    std::vector<double> bounds;
    Eigen::MatrixXd margin;
    std::vector<std::vector<Witness>> witness;

    explicit BucketTable(std::vector<double> b) : bounds(std::move(b)) {
        const int k = static_cast<int>(bounds.size());
        margin = Eigen::MatrixXd::Constant(k, k, kInf);
        witness.assign(k, std::vector<Witness>(k));
    }

    int bucket(double norm) const {
        for (std::size_t i = 0; i < bounds.size(); ++i)
            if (norm <= bounds[i] + 1e-12)
                return static_cast<int>(i);
        return static_cast<int>(bounds.size()) - 1;
    }

    void update(int bi, int bj, double m, const Witness& w) {
        if (m < margin(bi, bj)) {
            margin(bi, bj) = m;
            witness[bi][bj] = w;
        }
    }

    std::pair<double, Witness> prefix_min(int bi, int bj) const {
        double best = kInf;
        Witness w;
        for (int i = 0; i <= bi; ++i)
            for (int j = 0; j <= bj; ++j)
                if (margin(i, j) < best) {
                    best = margin(i, j);
                    w = witness[i][j];
                }
        return {best, w};
    }
};

std::vector<double> bucket_bounds(const SamplingPlan& plan) {
    std::vector<double> b = {0.2 * plan.delta, 0.5 * plan.delta, plan.delta,
                             2.0 * plan.delta};
    for (double r : plan.global_radii)
        b.push_back(r);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
            b.end());
    return b;
}

int delta_index(const std::vector<double>& bounds, double delta) {
    for (std::size_t i = 0; i < bounds.size(); ++i)
        if (bounds[i] >= delta - 1e-12)
            return static_cast<int>(i);
    return static_cast<int>(bounds.size()) - 1;
}

struct TierScan {
    BucketTable table;
    int skipped_nodes = 0;
    int singular_samples = 0;
    explicit TierScan(std::vector<double> bounds) : table(std::move(bounds)) {}
};

enum class BracketMode { SHIFTED_X, SECOND_ORDER };

// Shared evaluation loop for the first- and second-order certificates.
TierScan scan_certificate(const Expr& L, const Trajectory& xbar,
                          const QSpec& Q, const SamplingPlan& plan,
                          BracketMode mode) {
    const int n = xbar.dimension();
    TierScan scan(bucket_bounds(plan));
    Evaluator ev(L);

    Eigen::VectorXd xb(n), db(n), z(n), xshift(n), lx_base(n), tmp(n);
    Eigen::MatrixXd Qm(n, n), Qd(n, n), Hxx(n, n);

    const auto& xi_idx = plan.suff_xi_idx;
    const auto& eta_idx = plan.suff_eta_idx;
    const std::size_t nxi = xi_idx.size();

    std::vector<double> E(nxi), Escale(nxi);
    std::vector<Eigen::VectorXd> Qxi(nxi), dLx(nxi), zs(nxi);
    std::vector<double> Qxi_norm(nxi), dLx_norm(nxi);

    for (const auto& node : plan.suff_t_nodes) {
        if (node.t >= xbar.t1())
            continue; // the certificates quantify over [t0, t1)
        try {
            Q.eval(node.t, Qm, Qd);
        } catch (const NumericError& e) {
            if (e.code() == "Q_RANGE") {
                ++scan.skipped_nodes;
                continue;
            }
            throw;
        }
        xbar.eval(node.t, node.side, xb, db);
        JetView base = ev.jet1(node.t, xb.data(), db.data());
        const double ly = base.value;
        Eigen::VectorXd ldx(n);
        for (int i = 0; i < n; ++i) {
            lx_base[i] = base.grad_x(i);
            ldx[i] = base.grad_dx(i);
        }
        const double qd_norm = Qd.norm();

        for (std::size_t s = 0; s < nxi; ++s) {
            const Eigen::VectorXd& xi = plan.xi.points[xi_idx[s]];
            zs[s] = db + xi;
            double lin = ldx.dot(xi);
            double lz;
            Eigen::VectorXd lx_shifted_dx(n);
            if (mode == BracketMode::SECOND_ORDER) {
                JetView jz = ev.jet1(node.t, xb.data(), zs[s].data());
                lz = jz.value;
                for (int i = 0; i < n; ++i)
                    lx_shifted_dx[i] = jz.grad_x(i);
                dLx[s] = lx_shifted_dx - lx_base;
                dLx_norm[s] = dLx[s].norm();
            } else {
                lz = ev.value(node.t, xb.data(), zs[s].data());
            }
            E[s] = lz - ly - lin;
            Escale[s] = std::max({std::fabs(lz), std::fabs(ly), std::fabs(lin)});
            Qxi[s] = Qm * xi;
            Qxi_norm[s] = Qxi[s].norm();
        }

        for (double theta : plan.suff_theta) {
            for (int ei : eta_idx) {
                const Eigen::VectorXd& eta = plan.eta.points[ei];
                const double eta_norm = plan.eta.norms[ei];
                const int be = scan.table.bucket(eta_norm);
                xshift = xb + theta * eta;
                const double qd_quad = 0.5 * eta.dot(Qd * eta);

                for (std::size_t s = 0; s < nxi; ++s) {
                    double val, scale;
                    if (mode == BracketMode::SHIFTED_X) {
                        JetView js = ev.jet1(node.t, xshift.data(), zs[s].data());
                        bool ok = true;
                        for (int i = 0; i < n; ++i) {
                            tmp[i] = js.grad_x(i) - lx_base[i];
                            ok = ok && std::isfinite(tmp[i]);
                        }
                        if (!ok) {
                            ++scan.singular_samples;
                            continue;
                        }
                        double bracket = (Qxi[s] + tmp).dot(eta);
                        val = E[s] + bracket + qd_quad;
                        scale = Escale[s] +
                                (Qxi_norm[s] + tmp.norm()) * eta_norm +
                                0.5 * eta_norm * eta_norm * qd_norm;
                    } else {
                        JetView js = ev.jet2(node.t, xshift.data(), zs[s].data());
                        bool ok = true;
                        for (int r = 0; r < n; ++r)
                            for (int c = 0; c < n; ++c) {
                                Hxx(r, c) = js.hess_xx(r, c);
                                ok = ok && std::isfinite(Hxx(r, c));
                            }
                        if (!ok) {
                            ++scan.singular_samples;
                            continue;
                        }
                        double bracket = (Qxi[s] + dLx[s]).dot(eta);
                        double quad = qd_quad + 0.5 * eta.dot(Hxx * eta);
                        val = E[s] + bracket + quad;
                        scale = Escale[s] +
                                (Qxi_norm[s] + dLx_norm[s]) * eta_norm +
                                0.5 * eta_norm * eta_norm * (qd_norm + Hxx.norm());
                    }
                    double margin = val / std::max(1.0, scale);
                    Witness w;
                    w.t = node.t;
                    w.side = node.side;
                    w.xi = plan.xi.points[xi_idx[s]];
                    w.eta = eta;
                    w.theta = theta;
                    scan.table.update(scan.table.bucket(plan.xi.norms[xi_idx[s]]),
                                      be, margin, w);
                }
            }
        }
    }
    return scan;
}

ConditionReport tier_report(const std::string& name, double margin,
                            const Witness& w, const SamplingPlan& plan) {
    ConditionReport rep;
    rep.condition = name;
    rep.plan_digest = plan.digest();
    rep.worst_margin = margin;
    if (margin >= -plan.pass_tol) {
        rep.verdict = Verdict::HOLDS;
    } else if (margin < -plan.fail_tol) {
        rep.verdict = Verdict::FAILS;
        rep.witness = w;
    } else {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.witness = w;
    }
    return rep;
}

// Candidate-side continuity probe: evaluates the jet along the candidate on
// the decimated grid and reports whether the requested blocks stay finite.
bool probe_along_candidate(const Expr& L, const Trajectory& xbar,
                           const SamplingPlan& plan, bool need_hess_xx,
                           double* bad_t) {
    const int n = xbar.dimension();
    Evaluator ev(L);
    Eigen::VectorXd x(n), dx(n);
    for (const auto& node : plan.suff_t_nodes) {
        if (node.t >= xbar.t1())
            continue;
        xbar.eval(node.t, node.side, x, dx);
        if (need_hess_xx) {
            JetView j = ev.jet2(node.t, x.data(), dx.data());
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    if (!std::isfinite(j.hess_xx(r, c))) {
                        *bad_t = node.t;
                        return false;
                    }
        } else {
            JetView j = ev.jet1(node.t, x.data(), dx.data());
            for (int i = 0; i < 2 * n + 1; ++i)
                if (!std::isfinite(j.grad[i])) {
                    *bad_t = node.t;
                    return false;
                }
        }
    }
    return true;
}

MinimumVerdict grade_from_scan(const std::string& method, const TierScan& scan,
                               const SamplingPlan& plan, const QSpec& Q) {
    MinimumVerdict v;
    v.method = method;
    v.q_digest = Q.digest();
    const auto& bounds = scan.table.bounds;
    const int last = static_cast<int>(bounds.size()) - 1;
    const int di = delta_index(bounds, plan.delta);

    auto [abs_m, abs_w] = scan.table.prefix_min(last, last);
    auto [strong_m, strong_w] = scan.table.prefix_min(last, di);
    auto [weak_m, weak_w] = scan.table.prefix_min(di, di);

    v.reports.push_back(tier_report(method + "_absolute", abs_m, abs_w, plan));
    v.reports.push_back(tier_report(method + "_strong", strong_m, strong_w, plan));
    v.reports.push_back(tier_report(method + "_weak", weak_m, weak_w, plan));

    for (double r : {0.2 * plan.delta, 0.5 * plan.delta, plan.delta,
                     2.0 * plan.delta}) {
        int bi = delta_index(bounds, r);
        auto [m, w] = scan.table.prefix_min(bi, bi);
        (void)w;
        v.delta_sweep.push_back({bounds[bi], m, m >= -plan.pass_tol});
    }

    if (abs_m >= -plan.pass_tol)
        v.grade = Grade::ABSOLUTE;
    else if (strong_m >= -plan.pass_tol)
        v.grade = Grade::STRONG_LOCAL;
    else if (weak_m >= -plan.pass_tol)
        v.grade = Grade::WEAK_LOCAL;
    else
        v.grade = Grade::NONE_CERTIFIED;

    if (v.grade == Grade::ABSOLUTE)
        v.note = "no counterexample up to radius " +
                 std::to_string(plan.r_global());
    if (scan.skipped_nodes > 0)
        v.note += (v.note.empty() ? "" : "; ") +
                  std::to_string(scan.skipped_nodes) +
                  " nodes beyond the Q solution grid skipped";
    if (scan.singular_samples > 0)
        v.note += (v.note.empty() ? "" : "; ") +
                  std::to_string(scan.singular_samples) +
                  " samples with unbounded derivatives skipped";
    return v;
}

MinimumVerdict inapplicable(const std::string& method, const std::string& why) {
    MinimumVerdict v;
    v.method = method;
    v.applicable = false;
    v.grade = Grade::NONE_CERTIFIED;
    v.note = why;
    return v;
}

} // namespace

std::string to_string(Grade g) {
    switch (g) {
    case Grade::ABSOLUTE:
        return "ABSOLUTE";
    case Grade::STRONG_LOCAL:
        return "STRONG_LOCAL";
    case Grade::WEAK_LOCAL:
        return "WEAK_LOCAL";
    default:
        return "NONE_CERTIFIED";
    }
}

ConditionReport check_q_admissibility(const QSpec& Q, double t0, double t1,
                                      double slack) {
    ConditionReport rep;
    rep.condition = "q_admissibility";
    if (Q.is_zero()) {
        rep.verdict = Verdict::HOLDS;
        rep.worst_margin = slack;
        rep.note = "Q identically zero";
        return rep;
    }
    const int n = Q.dimension();
    const double span = t1 - t0;
    Eigen::MatrixXd Qm(n, n), Qd(n, n);

    // finiteness (and symmetry, enforced by eval) away from the endpoint
    for (int i = 0; i <= 32; ++i) {
        double t = t0 + span * i / 32.0 * (1.0 - std::ldexp(1.0, -5));
        Q.eval(t, Qm, Qd);
        if (!Qm.allFinite())
            throw NumericError("NONFINITE_Q",
                               "Q not finite before the endpoint tail", t);
    }

    // tail growth exponents by log-log fit against (t1 - t)
    std::vector<double> le, lq, lqd;
    double qmax = 0.0;
    for (int j = 4; j <= 40; ++j) {
        double eps = span * std::ldexp(1.0, -j);
        double t = t1 - eps;
        try {
            Q.eval(t, Qm, Qd);
        } catch (const NumericError& e) {
            if (e.code() == "Q_RANGE")
                break;
            throw;
        }
        double nq = Qm.norm(), nqd = Qd.norm();
        if (!std::isfinite(nq) || !std::isfinite(nqd))
            break;
        qmax = std::max({qmax, nq, nqd});
        le.push_back(std::log(eps));
        lq.push_back(nq);
        lqd.push_back(nqd);
    }
    if (le.size() < 8) {
        rep.verdict = Verdict::INCONCLUSIVE;
        rep.note = "endpoint tail too short to fit growth exponents";
        return rep;
    }

    auto fit_alpha = [&](const std::vector<double>& norms) {
        // all-negligible norms: no growth
        double mx = 0.0;
        for (double v : norms)
            mx = std::max(mx, v);
        if (mx < 1e-12)
            return 0.0;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (std::size_t i = 0; i < norms.size(); ++i) {
            if (norms[i] < mx * 1e-300)
                continue;
            double y = std::log(std::max(norms[i], 1e-300));
            sx += le[i];
            sy += y;
            sxx += le[i] * le[i];
            sxy += le[i] * y;
            ++m;
        }
        double denom = m * sxx - sx * sx;
        if (std::fabs(denom) < 1e-30)
            return 0.0;
        double slope = (m * sxy - sx * sy) / denom;
        return -slope; // ||Q|| ~ (t1-t)^(-alpha)
    };

    double alpha_q = fit_alpha(lq);
    double alpha_qd = fit_alpha(lqd);
    double margin = std::min((1.0 + slack) - alpha_q, (2.0 + slack) - alpha_qd);
    rep.worst_margin = margin;
    rep.note = "alpha_q=" + std::to_string(alpha_q) +
               " alpha_qdot=" + std::to_string(alpha_qd);
    if (margin >= 0.0) {
        rep.verdict = Verdict::HOLDS;
    } else {
        rep.verdict = Verdict::FAILS;
        Witness w;
        w.t = t1;
        rep.witness = w;
    }
    return rep;
}

double lhs_thm41(const Expr& L, const Trajectory& xbar, double t,
                 const Eigen::VectorXd& xi, const Eigen::VectorXd& eta,
                 double theta, const QSpec& Q) {
    const int n = xbar.dimension();
    Eigen::VectorXd xb(n), db(n);
    xbar.eval(t, kAuto, xb, db);
    Eigen::MatrixXd Qm(n, n), Qd(n, n);
    Q.eval(t, Qm, Qd);

    Evaluator ev(L);
    JetView base = ev.jet1(t, xb.data(), db.data());
    double ly = base.value;
    Eigen::VectorXd lx_base(n), ldx(n);
    for (int i = 0; i < n; ++i) {
        lx_base[i] = base.grad_x(i);
        ldx[i] = base.grad_dx(i);
    }
    Eigen::VectorXd z = db + xi;
    Eigen::VectorXd xs = xb + theta * eta;
    JetView shifted = ev.jet1(t, xs.data(), z.data());
    Eigen::VectorXd lx_shift(n);
    for (int i = 0; i < n; ++i)
        lx_shift[i] = shifted.grad_x(i);
    double lz = ev.value(t, xb.data(), z.data());
    double e = (xi.isZero(0.0)) ? 0.0 : lz - ly - ldx.dot(xi);
    return e + (Qm * xi + lx_shift - lx_base).dot(eta) + 0.5 * eta.dot(Qd * eta);
}

MinimumVerdict check_thm41(const Expr& L, const Trajectory& xbar,
                           const QSpec& Q, const SamplingPlan& plan) {
    double bad_t = 0.0;
    if (!probe_along_candidate(L, xbar, plan, false, &bad_t))
        return inapplicable("first_order_q",
                            "first derivatives unbounded along the candidate "
                            "near t=" + std::to_string(bad_t));
    ConditionReport adm = check_q_admissibility(Q, xbar.t0(), xbar.t1());
    if (adm.verdict != Verdict::HOLDS) {
        MinimumVerdict v = inapplicable("first_order_q",
                                        "Q fails endpoint admissibility");
        v.reports.push_back(adm);
        v.q_digest = Q.digest();
        return v;
    }
    TierScan scan = scan_certificate(L, xbar, Q, plan, BracketMode::SHIFTED_X);
    MinimumVerdict v = grade_from_scan("first_order_q", scan, plan, Q);
    v.reports.push_back(adm);
    return v;
}

MinimumVerdict check_thm42(const Expr& L, const Trajectory& xbar,
                           const QSpec& Q, const SamplingPlan& plan) {
    double bad_t = 0.0;
    if (!probe_along_candidate(L, xbar, plan, true, &bad_t))
        return inapplicable("second_order_q",
                            "second x-derivatives unbounded along the "
                            "candidate near t=" + std::to_string(bad_t));
    ConditionReport adm = check_q_admissibility(Q, xbar.t0(), xbar.t1());
    if (adm.verdict != Verdict::HOLDS) {
        MinimumVerdict v = inapplicable("second_order_q",
                                        "Q fails endpoint admissibility");
        v.reports.push_back(adm);
        v.q_digest = Q.digest();
        return v;
    }
    TierScan scan = scan_certificate(L, xbar, Q, plan, BracketMode::SECOND_ORDER);
    MinimumVerdict v = grade_from_scan("second_order_q", scan, plan, Q);
    v.reports.push_back(adm);
    return v;
}

MinimumVerdict check_thm43(const Expr& L, const Trajectory& xbar,
                           const SamplingPlan& plan, const StructureInfo& st) {
    if (!st.affine_in_x)
        throw NumericError("INAPPLICABLE",
                           "integrand is not affine in x (sampled)");
    MinimumVerdict v;
    v.method = "affine_excess";
    v.q_digest = "q:none";
    ConditionReport global =
        check_weierstrass(L, xbar, plan, WeierstrassTier::GLOBAL);
    ConditionReport local =
        check_weierstrass(L, xbar, plan, WeierstrassTier::LOCAL);
    global.condition = "affine_excess_global";
    local.condition = "affine_excess_local";
    v.reports.push_back(global);
    v.reports.push_back(local);
    if (global.verdict == Verdict::HOLDS)
        v.grade = Grade::ABSOLUTE;
    else if (local.verdict == Verdict::HOLDS)
        v.grade = Grade::WEAK_LOCAL;
    else
        v.grade = Grade::NONE_CERTIFIED;
    if (v.grade == Grade::ABSOLUTE)
        v.note = "no counterexample up to radius " +
                 std::to_string(plan.r_global());
    return v;
}

namespace {

// eta^T Hxx(t, xbar + theta*eta, xbardot) eta >= 0, bucketed by |eta|.
struct HessScan {
    std::vector<double> bounds;
    std::vector<double> margin;
    std::vector<Witness> witness;
    bool singular = false;
    double singular_t = 0.0;
};

HessScan scan_xx_form(const Expr& L, const Trajectory& xbar,
                      const SamplingPlan& plan) {
    const int n = xbar.dimension();
    HessScan hs;
    hs.bounds = bucket_bounds(plan);
    hs.margin.assign(hs.bounds.size(), kInf);
    hs.witness.assign(hs.bounds.size(), Witness{});
    BucketTable bt(hs.bounds);
    Evaluator ev(L);
    Eigen::VectorXd xb(n), db(n), xs(n);
    Eigen::MatrixXd Hxx(n, n);
    for (const auto& node : plan.suff_t_nodes) {
        if (node.t >= xbar.t1())
            continue;
        xbar.eval(node.t, node.side, xb, db);
        for (double theta : plan.suff_theta) {
            for (int ei : plan.suff_eta_idx) {
                const Eigen::VectorXd& eta = plan.eta.points[ei];
                double eta_norm = plan.eta.norms[ei];
                if (eta_norm == 0.0)
                    continue;
                xs = xb + theta * eta;
                JetView j = ev.jet2(node.t, xs.data(), db.data());
                bool ok = true;
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) {
                        Hxx(r, c) = j.hess_xx(r, c);
                        ok = ok && std::isfinite(Hxx(r, c));
                    }
                if (!ok) {
                    hs.singular = true;
                    hs.singular_t = node.t;
                    continue;
                }
                double val = eta.dot(Hxx * eta);
                double scale = eta_norm * eta_norm * Hxx.norm();
                double m = val / std::max(1.0, scale);
                int b = bt.bucket(eta_norm);
                if (m < hs.margin[b]) {
                    hs.margin[b] = m;
                    Witness w;
                    w.t = node.t;
                    w.side = node.side;
                    w.eta = eta;
                    w.theta = theta;
                    hs.witness[b] = w;
                }
            }
        }
    }
    return hs;
}

std::pair<double, Witness> hess_prefix(const HessScan& hs, int bi) {
    double best = kInf;
    Witness w;
    for (int i = 0; i <= bi; ++i)
        if (hs.margin[i] < best) {
            best = hs.margin[i];
            w = hs.witness[i];
        }
    return {best, w};
}

} // namespace

MinimumVerdict check_thm44(const Expr& L, const Trajectory& xbar,
                           const SamplingPlan& plan, const StructureInfo& st) {
    if (!st.separable)
        throw NumericError("INAPPLICABLE",
                           "integrand is not separable in (x, dx) (sampled)");
    MinimumVerdict v;
    v.method = "separable_split";
    v.q_digest = "q:none";

    // (a) excess with frozen x (equal to the dx-part excess under
    // separability)
    ConditionReport eg = check_weierstrass(L, xbar, plan, WeierstrassTier::GLOBAL);
    ConditionReport el = check_weierstrass(L, xbar, plan, WeierstrassTier::LOCAL);
    eg.condition = "separable_excess_global";
    el.condition = "separable_excess_local";

    // (b) x-Hessian form (equal to the x-part Hessian under separability)
    HessScan hs = scan_xx_form(L, xbar, plan);
    if (hs.singular)
        return inapplicable("separable_split",
                            "second x-derivatives unbounded near t=" +
                                std::to_string(hs.singular_t));
    const int last = static_cast<int>(hs.bounds.size()) - 1;
    const int di = delta_index(hs.bounds, plan.delta);
    auto [hg_m, hg_w] = hess_prefix(hs, last);
    auto [hd_m, hd_w] = hess_prefix(hs, di);
    v.reports.push_back(eg);
    v.reports.push_back(el);
    v.reports.push_back(tier_report("separable_xx_global", hg_m, hg_w, plan));
    v.reports.push_back(tier_report("separable_xx_ball", hd_m, hd_w, plan));

    bool excess_global = eg.verdict == Verdict::HOLDS;
    bool excess_local = el.verdict == Verdict::HOLDS;
    bool xx_global = hg_m >= -plan.pass_tol;
    bool xx_ball = hd_m >= -plan.pass_tol;

    if (excess_global && xx_global)
        v.grade = Grade::ABSOLUTE;
    else if (excess_global && xx_ball)
        v.grade = Grade::STRONG_LOCAL;
    else if (excess_local && xx_ball)
        v.grade = Grade::WEAK_LOCAL;
    else
        v.grade = Grade::NONE_CERTIFIED;
    if (v.grade == Grade::ABSOLUTE)
        v.note = "no counterexample up to radius " +
                 std::to_string(plan.r_global());
    return v;
}

MinimumVerdict check_corollary41(const Expr& L, const Trajectory& xbar,
                                 const SamplingPlan& plan,
                                 const StructureInfo& st) {
    MinimumVerdict v = check_thm43(L, xbar, plan, st);
    v.method = "affine_excess_iff";
    v.necessary_and_sufficient = true;
    for (auto& rep : v.reports)
        rep.condition = "iff_" + rep.condition;
    // In this class the excess condition is also necessary, so a global
    // counterexample certifies the negative.
    for (const auto& rep : v.reports)
        if (rep.condition == "iff_affine_excess_global" &&
            rep.verdict == Verdict::FAILS)
            v.certified_not_absolute = true;
    return v;
}

MinimumVerdict synthesize_verdict(const std::vector<MinimumVerdict>& all) {
    static const char* kPriority[] = {"separable_split", "affine_excess",
                                      "affine_excess_iff", "second_order_q",
                                      "second_order_riccati", "first_order_q"};
    auto rank = [](const std::string& m) {
        for (std::size_t i = 0; i < std::size(kPriority); ++i)
            if (m == kPriority[i])
                return static_cast<int>(i);
        return static_cast<int>(std::size(kPriority));
    };
    auto grade_rank = [](Grade g) {
        switch (g) {
        case Grade::ABSOLUTE:
            return 0;
        case Grade::STRONG_LOCAL:
            return 1;
        case Grade::WEAK_LOCAL:
            return 2;
        default:
            return 3;
        }
    };

    MinimumVerdict best;
    best.method = "none";
    bool have = false;
    for (const auto& v : all) {
        if (!v.applicable)
            continue;
        if (!have || grade_rank(v.grade) < grade_rank(best.grade) ||
            (grade_rank(v.grade) == grade_rank(best.grade) &&
             rank(v.method) < rank(best.method))) {
            best = v;
            have = true;
        }
    }
    if (!have) {
        best = MinimumVerdict{};
        best.method = "none";
        best.note = "no applicable certificate";
        return best;
    }
    // merge labels from equal-grade certificates
    for (const auto& v : all) {
        if (!v.applicable || v.grade != best.grade)
            continue;
        best.necessary_and_sufficient |= v.necessary_and_sufficient;
    }
    for (const auto& v : all)
        best.certified_not_absolute |= v.certified_not_absolute;
    if (best.grade == Grade::NONE_CERTIFIED) {
        // carry every witness found by the failed certificates
        for (const auto& v : all)
            for (const auto& rep : v.reports)
                if (rep.witness)
                    best.reports.push_back(rep);
    }
    return best;
}

ConditionReport dominance_diagnostic(const Expr& L, const Trajectory& xbar,
                                     const SamplingPlan& plan) {
    ConditionReport rep;
    rep.condition = "pointwise_dominance";
    rep.plan_digest = plan.digest();
    rep.note = "diagnostic only; no verdict semantics attached";
    const int n = xbar.dimension();
    Evaluator ev(L);
    Eigen::VectorXd xb(n), db(n), xs(n), zs(n);

    double worst = kInf;
    std::optional<Witness> witness;
    for (const auto& node : plan.suff_t_nodes) {
        if (node.t >= xbar.t1())
            continue;
        xbar.eval(node.t, node.side, xb, db);
        JetView base = ev.jet1(node.t, xb.data(), db.data());
        double lbar = base.value;
        Eigen::VectorXd lx(n), ldx(n);
        for (int i = 0; i < n; ++i) {
            lx[i] = base.grad_x(i);
            ldx[i] = base.grad_dx(i);
        }
        for (int xi_i : plan.suff_xi_idx) {
            const Eigen::VectorXd& xi = plan.xi.points[xi_i];
            zs = db + xi;
            for (int eta_i : plan.suff_eta_idx) {
                const Eigen::VectorXd& eta = plan.eta.points[eta_i];
                xs = xb + eta;
                double lv = ev.value(node.t, xs.data(), zs.data());
                double val = lv - lbar - lx.dot(eta) - ldx.dot(xi);
                double scale = std::max(
                    {1.0, std::fabs(lv), std::fabs(lbar),
                     std::fabs(lx.dot(eta)) + std::fabs(ldx.dot(xi))});
                double m = val / scale;
                if (m < worst) {
                    worst = m;
                    Witness w;
                    w.t = node.t;
                    w.side = node.side;
                    w.xi = xi;
                    w.eta = eta;
                    witness = w;
                }
            }
        }
    }
    rep.worst_margin = worst;
    rep.verdict = worst >= -plan.pass_tol
                      ? Verdict::HOLDS
                      : (worst < -plan.fail_tol ? Verdict::FAILS
                                                : Verdict::INCONCLUSIVE);
    if (rep.verdict != Verdict::HOLDS)
        rep.witness = witness;
    return rep;
}

} // namespace varmin
