#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "varmin/errors.hpp"

namespace varmin {

// Adaptive Dormand-Prince 5(4) with FSAL and a PI-free elementary step
// controller. Deterministic for fixed inputs.

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0; // 0 = derive from the interval
    long max_steps = 500000;
};

enum class OdeStatus { OK, STOPPED, STEP_UNDERFLOW, MAX_STEPS };

using OdeRhs =
    std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
// Called after each accepted step with (t, y, ydot); return false to stop.
using OdeObserver = std::function<bool(double, const Eigen::VectorXd&,
                                       const Eigen::VectorXd&)>;
// Optional state projection applied after each accepted step.
using OdeProject = std::function<void(Eigen::VectorXd&)>;

inline OdeStatus integrate_dopri5(const OdeRhs& rhs, double t0,
                                  Eigen::VectorXd& y, double t_end,
                                  const OdeOptions& opt,
                                  const OdeObserver& observer = {},
                                  const OdeProject& project = {}) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                        c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

    const int dir = t_end >= t0 ? 1 : -1;
    const double span = std::fabs(t_end - t0);
    double t = t0;
    double h = opt.h_init > 0 ? opt.h_init : span / 100.0;
    h *= dir;

    const Eigen::Index n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    Eigen::VectorXd ytmp(n), ynew(n), yerr(n);

    rhs(t, y, k1);
    if (observer && !observer(t, y, k1))
        return OdeStatus::STOPPED;

    for (long step = 0; step < opt.max_steps; ++step) {
        if (dir * (t - t_end) >= 0)
            return OdeStatus::OK;
        if (dir * (t + h - t_end) > 0)
            h = t_end - t;
        if (std::fabs(h) < 1e-15 * std::max(1.0, std::fabs(t)))
            return OdeStatus::STEP_UNDERFLOW;

        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double sc = opt.atol +
                        opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            double r = yerr[i] / sc;
            err += r * r;
        }
        err = std::sqrt(err / double(n));

        if (err <= 1.0 || !std::isfinite(err)) {
            if (!std::isfinite(err) || !ynew.allFinite())
                return OdeStatus::STEP_UNDERFLOW;
            t += h;
            y = ynew;
            if (project) {
                project(y);
                rhs(t, y, k7);
            }
            k1 = k7; // FSAL
            if (observer && !observer(t, y, k1))
                return OdeStatus::STOPPED;
        }
        double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        fac = std::min(5.0, std::max(0.2, fac));
        h *= fac;
    }
    return OdeStatus::MAX_STEPS;
}

} // namespace varmin
