#pragma once

#include <functional>
#include <vector>

#include "varmin/expr.hpp"
#include "varmin/qspec.hpp"
#include "varmin/trajectory.hpp"

namespace varmin {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    int subdivisions = 0;
};

// Adaptive Gauss-Kronrod (7-15) over [a, b], splitting first at the given
// interior breakpoints, then bisecting the interval with the largest error
// estimate. Throws NumericError("NO_CONVERGENCE") once the subdivision
// budget is exhausted with the error estimate still above tol.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const std::vector<double>& breakpoints,
                                    double tol, int budget = 10000);

// S(L)(x) = integral of L(t, x(t), xdot(t)) dt, corner-aligned.
QuadratureResult integrate_functional(const Expr& L, const Trajectory& tr,
                                      double tol = 1e-9);

// S(L)(xbar + dx) - S(L)(xbar), evaluated as one integral of the pointwise
// difference (the scale of the perturbation is carried by `dx`).
double direct_increment(const Expr& L, const Trajectory& xbar,
                        const Perturbation& dx, double tol = 1e-9);

// Augmented increment: integral of
//   L(t, xbar+dx, xbardot+dxdot) - L(t, xbar, xbardot)
//   + dxdot^T Q dx + 1/2 dx^T Qdot dx.
// The added rows integrate a total derivative that vanishes at the
// endpoints, so for any admissible Q this equals direct_increment up to
// quadrature error. Q may grow toward t1 (admissibly); the last stretch is
// integrated on geometrically shrinking subintervals and the remaining tail
// extrapolated, failing with NO_CONVERGENCE if the tail does not settle.
double increment_via_eq34(const Expr& L, const Trajectory& xbar,
                          const Perturbation& dx, const QSpec& Q,
                          double tol = 1e-9);

} // namespace varmin
