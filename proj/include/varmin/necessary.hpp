#pragma once

#include "varmin/expr.hpp"
#include "varmin/sampling.hpp"
#include "varmin/trajectory.hpp"

namespace varmin {

// Classical necessary conditions along a candidate trajectory, rendered as
// sampled verdicts.

// Excess function E(L)(t, x, y, z) = L(t,x,z) - L(t,x,y) - L_y(t,x,y)^T (z-y).
// Exactly zero when z == y componentwise.
double excess(const Expr& L, double t, const Eigen::VectorXd& x,
              const Eigen::VectorXd& y, const Eigen::VectorXd& z);

// Integral-form first-order residual: g(t) = L_dx(t) - integral of L_x up to
// t must be a constant vector c on each smooth piece (same c across corners).
struct EulerResidual {
    Eigen::VectorXd c_estimate;
    double max_deviation = 0.0;
    std::vector<double> per_piece_deviation;
    Verdict verdict = Verdict::INCONCLUSIVE;
    double tol = 0.0;
};

EulerResidual check_euler(const Expr& L, const Trajectory& xbar,
                          double tol = 1e-8);

// Corner conditions: continuity of L_dx and of L - dx^T L_dx across every
// corner. Vacuously HOLDS without corners.
ConditionReport check_weierstrass_erdmann(const Expr& L,
                                          const Trajectory& xbar,
                                          double tol = 1e-9);

// Positive semidefiniteness of L_dxdx along the candidate, one-sided at
// corners. Near-zero minimum eigenvalues are flagged as degeneracies.
ConditionReport check_legendre(const Expr& L, const Trajectory& xbar,
                               const SamplingPlan& plan);

enum class WeierstrassTier { LOCAL, GLOBAL };

// Nonnegativity of the excess along the candidate: LOCAL samples the ball of
// radius plan.delta, GLOBAL additionally sweeps the plan's radius tiers. A
// HOLDS on the global tier means "no counterexample up to r_global".
ConditionReport check_weierstrass(const Expr& L, const Trajectory& xbar,
                                  const SamplingPlan& plan,
                                  WeierstrassTier tier);

} // namespace varmin
