#pragma once

#include "varmin/expr.hpp"
#include "varmin/qspec.hpp"
#include "varmin/sampling.hpp"
#include "varmin/structure.hpp"
#include "varmin/trajectory.hpp"

namespace varmin {

// Certificate checks for a candidate extremal. Each check evaluates its
// defining inequality over nested quantifier tiers,
//   absolute:     xi and eta over all radius tiers up to r_global,
//   strong local: xi over all tiers, eta within the delta ball,
//   weak local:   xi and eta within the delta ball,
// and certifies the strongest tier whose sampled minimum stays above
// -pass_tol (margins scale-normalized as in ConditionReport). A sampled
// verdict is never a proof; the plan digest pins what was checked.

enum class Grade { ABSOLUTE, STRONG_LOCAL, WEAK_LOCAL, NONE_CERTIFIED };

std::string to_string(Grade g);

struct DeltaSweepEntry {
    double radius = 0.0;
    double margin = 0.0;
    bool holds = false;
};

struct MinimumVerdict {
    Grade grade = Grade::NONE_CERTIFIED;
    std::string method; // certificate identifier
    bool applicable = true;
    bool necessary_and_sufficient = false;
    bool certified_not_absolute = false;
    std::vector<ConditionReport> reports; // one per tier, plus extras
    std::string q_digest;
    std::vector<DeltaSweepEntry> delta_sweep;
    std::string note;
};

// Endpoint admissibility of Q: symmetry on the grid, finiteness before the
// tail region, and fitted growth exponents ||Q|| = O((t1-t)^-a) with
// a <= 1 + slack and ||Qdot|| = O((t1-t)^-b) with b <= 2 + slack.
ConditionReport check_q_admissibility(const QSpec& Q, double t0, double t1,
                                      double slack = 0.05);

// Left-hand side of the first-order certificate inequality at one sample:
//   E(L)(t, xbar, xbardot, xbardot+xi)
//   + [xi^T Q + L_x(t, xbar+theta*eta, xbardot+xi) - L_x(t, xbar, xbardot)] eta
//   + 1/2 eta^T Qdot eta.
double lhs_thm41(const Expr& L, const Trajectory& xbar, double t,
                 const Eigen::VectorXd& xi, const Eigen::VectorXd& eta,
                 double theta, const QSpec& Q);

// First-order certificate (needs L, L_x, L_dx continuous; Q admissible).
MinimumVerdict check_thm41(const Expr& L, const Trajectory& xbar,
                           const QSpec& Q, const SamplingPlan& plan);

// Second-order certificate: the x-bracket is taken at the unshifted state
// and the shift enters through L_xx (needs L_xx continuous; Q admissible).
MinimumVerdict check_thm42(const Expr& L, const Trajectory& xbar,
                           const QSpec& Q, const SamplingPlan& plan);

// Integrands affine in x: nonnegative excess alone decides, two tiers
// (absolute / weak local). Throws NumericError("INAPPLICABLE") when the
// sampled structure is not affine in x.
MinimumVerdict check_thm43(const Expr& L, const Trajectory& xbar,
                           const SamplingPlan& plan, const StructureInfo& st);

// Separable integrands L = L0(t, dx) + L1(t, x): excess with frozen x plus
// positive semidefiniteness of the x-Hessian, three tiers.
MinimumVerdict check_thm44(const Expr& L, const Trajectory& xbar,
                           const SamplingPlan& plan, const StructureInfo& st);

// Affine-in-x class where the excess condition is necessary and sufficient:
// same decision procedure as check_thm43 but a FAILS on the global tier
// certifies that the candidate is not an absolute minimum.
MinimumVerdict check_corollary41(const Expr& L, const Trajectory& xbar,
                                 const SamplingPlan& plan,
                                 const StructureInfo& st);

// Strongest certified grade wins; ties prefer the structure-specialized
// certificates (separable, affine, second-order, first-order).
MinimumVerdict synthesize_verdict(const std::vector<MinimumVerdict>& all);

// Report-only diagnostic: pointwise dominance of the first-order shifted
// integrand, D = L(t, xbar+eta, xbardot+xi) - Lbar - Lbar_x^T eta
// - Lbar_dx^T xi >= 0. No verdict semantics in synthesis.
ConditionReport dominance_diagnostic(const Expr& L, const Trajectory& xbar,
                                     const SamplingPlan& plan);

} // namespace varmin
