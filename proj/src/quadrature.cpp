#include "varmin/quadrature.hpp"

#include "varmin/ad.hpp"
#include "varmin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace varmin {

namespace {

// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value, err;
};

// One Gauss-Kronrod 7-15 evaluation with a QUADPACK-style error estimate.
Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    double fv[15];
    double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    double resabs = std::fabs(resk);
    for (int i = 0; i < 7; ++i) {
        double x = h * kXgk[i];
        double f1 = f(c - x), f2 = f(c + x);
        fv[i] = f1;
        fv[7 + i] = f2;
        resk += kWgk[i] * (f1 + f2);
        if (i % 2 == 1)
            resg += kWg[i / 2] * (f1 + f2);
        resabs += kWgk[i] * (std::fabs(f1) + std::fabs(f2));
    }
    double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::fabs(fc - reskh);
    for (int i = 0; i < 7; ++i)
        resasc += kWgk[i] *
                  (std::fabs(fv[i] - reskh) + std::fabs(fv[7 + i] - reskh));
    resasc *= std::fabs(h);
    resabs *= std::fabs(h);

    double value = resk * h;
    double err = std::fabs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(err, 50.0 * eps * resabs);
    if (!std::isfinite(value))
        throw NumericError("NONFINITE_INTEGRAND",
                           "integrand evaluated to a non-finite value", c);
    return {a, b, value, err};
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const std::vector<double>& breakpoints,
                                    double tol, int budget) {
    auto cmp = [](const Panel& p, const Panel& q) {
        if (p.err != q.err)
            return p.err < q.err;
        return p.a > q.a; // deterministic tie-break
    };
    std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);

    std::vector<double> cuts;
    cuts.push_back(a);
    for (double c : breakpoints)
        if (c > a && c < b)
            cuts.push_back(c);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    int subdivisions = 0;
    double total = 0.0, toterr = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = gk15(f, cuts[i], cuts[i + 1]);
        total += p.value;
        toterr += p.err;
        heap.push(p);
    }

    while (toterr > tol) {
        if (subdivisions >= budget)
            throw NumericError("NO_CONVERGENCE",
                               "subdivision budget exhausted, error " +
                                   std::to_string(toterr),
                               heap.top().a);
        Panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw NumericError("NO_CONVERGENCE",
                               "interval too small to split further", worst.a);
        Panel left = gk15(f, worst.a, mid);
        Panel right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        toterr += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
    }
    return {total, toterr, subdivisions};
}

QuadratureResult integrate_functional(const Expr& L, const Trajectory& tr,
                                      double tol) {
    if (L.dimension() != tr.dimension())
        throw NumericError("BAD_ARGUMENT",
                           "integrand and trajectory dimension mismatch");
    Evaluator ev(L);
    Eigen::VectorXd x(tr.dimension()), dx(tr.dimension());
    auto f = [&](double t) {
        tr.eval(t, kAuto, x, dx);
        return ev.value(t, x.data(), dx.data());
    };
    return integrate_adaptive(f, tr.t0(), tr.t1(), tr.breakpoints(), tol);
}

namespace {

std::vector<double> merged_breakpoints(const Trajectory& a,
                                       const Trajectory& b) {
    std::vector<double> cuts = a.breakpoints();
    const auto& other = b.breakpoints();
    cuts.insert(cuts.end(), other.begin(), other.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

} // namespace

double direct_increment(const Expr& L, const Trajectory& xbar,
                        const Perturbation& dx, double tol) {
    Evaluator ev(L);
    const int n = xbar.dimension();
    Eigen::VectorXd xb(n), db(n), pv(n), pd(n), xs(n), ds(n);
    auto f = [&](double t) {
        xbar.eval(t, kAuto, xb, db);
        dx.eval(t, pv, pd);
        xs = xb + pv;
        ds = db + pd;
        return ev.value(t, xs.data(), ds.data()) -
               ev.value(t, xb.data(), db.data());
    };
    auto cuts = merged_breakpoints(xbar, dx.base());
    return integrate_adaptive(f, xbar.t0(), xbar.t1(), cuts, tol).value;
}

double increment_via_eq34(const Expr& L, const Trajectory& xbar,
                          const Perturbation& dx, const QSpec& Q,
                          double tol) {
    const int n = xbar.dimension();
    if (Q.dimension() != n && !Q.is_zero())
        throw NumericError("BAD_ARGUMENT", "Q dimension mismatch");
    Evaluator ev(L);
    Eigen::VectorXd xb(n), db(n), pv(n), pd(n), xs(n), ds(n);
    Eigen::MatrixXd qm(n, n), qd(n, n);
    auto f = [&](double t) {
        xbar.eval(t, kAuto, xb, db);
        dx.eval(t, pv, pd);
        xs = xb + pv;
        ds = db + pd;
        double base = ev.value(t, xs.data(), ds.data()) -
                      ev.value(t, xb.data(), db.data());
        if (Q.is_zero())
            return base;
        Q.eval(t, qm, qd);
        return base + pd.dot(qm * pv) + 0.5 * pv.dot(qd * pv);
    };

    const double t0 = xbar.t0(), t1 = xbar.t1();
    auto cuts = merged_breakpoints(xbar, dx.base());
    if (Q.is_zero())
        return integrate_adaptive(f, t0, t1, cuts, tol).value;

    // Q may grow toward t1 (admissible endpoint singularity): integrate the
    // bulk directly, then walk geometrically shrinking subintervals into t1
    // and extrapolate the remaining tail.
    const double span = t1 - t0;
    const int k_start = 8, k_max = 40;
    double edge = t1 - span * std::ldexp(1.0, -k_start);
    std::vector<double> bulk_cuts;
    for (double c : cuts)
        if (c < edge)
            bulk_cuts.push_back(c);
    double total = integrate_adaptive(f, t0, edge, bulk_cuts, 0.5 * tol).value;

    double seg_tol = 0.5 * tol / (k_max - k_start);
    double prev_seg = 0.0, last_seg = 0.0;
    int segments = 0;
    bool range_exhausted = false;
    for (int k = k_start + 1; k <= k_max; ++k) {
        double lo = t1 - span * std::ldexp(1.0, -(k - 1));
        double hi = t1 - span * std::ldexp(1.0, -k);
        double seg;
        try {
            seg = integrate_adaptive(f, lo, hi, {}, seg_tol).value;
        } catch (const NumericError& e) {
            if (e.code() == "Q_RANGE") {
                range_exhausted = true;
                break;
            }
            throw;
        }
        total += seg;
        prev_seg = last_seg;
        last_seg = seg;
        ++segments;
        if (segments >= 3 && std::fabs(seg) < 0.125 * tol &&
            std::fabs(prev_seg) < 0.125 * tol)
            break;
    }

    // geometric tail estimate from the last two segments
    if (segments >= 2 && last_seg != 0.0 && prev_seg != 0.0) {
        double r = last_seg / prev_seg;
        if (std::fabs(r) < 0.95) {
            total += last_seg * r / (1.0 - r);
        } else if (std::fabs(last_seg) > tol) {
            throw NumericError("NO_CONVERGENCE",
                               "endpoint tail of the augmented increment "
                               "does not converge",
                               t1 - span * std::ldexp(1.0, -(k_start + segments)));
        }
    } else if (range_exhausted && std::fabs(last_seg) > tol) {
        throw NumericError("NO_CONVERGENCE",
                           "Q solution grid ends before the tail settles", t1);
    }
    return total;
}

} // namespace varmin
