#include "varmin/structure.hpp"

#include "varmin/ad.hpp"
#include "varmin/detail/rng.hpp"

#include <cmath>

namespace varmin {

std::string to_string(StructureClass c) {
    switch (c) {
    case StructureClass::AFFINE_IN_X:
        return "AFFINE_IN_X";
    case StructureClass::QUADRATIC:
        return "QUADRATIC";
    case StructureClass::SEPARABLE:
        return "SEPARABLE";
    default:
        return "GENERAL";
    }
}

StructureInfo classify_structure(const Expr& e, const SamplingPlan& plan) {
    const int n = e.dimension();
    Evaluator ev(e);
    detail::Rng rng(plan.seed ^ 0x57a7c1a5);

    const int t_samples = 17;
    const int point_samples = 24;
    const double hess_tol = 1e-10;
    const double cubic_tol = 1e-8;

    bool affine = true, separable = true, quadratic = true;

    std::vector<double> ts;
    for (int i = 0; i < t_samples; ++i)
        ts.push_back(plan.t0 + (plan.t1 - plan.t0) * (i + 0.5) / t_samples);

    Eigen::VectorXd x(n), dx(n);
    for (int s = 0; s < point_samples && (affine || separable || quadratic); ++s) {
        double t = ts[s % ts.size()];
        for (int i = 0; i < n; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
            dx[i] = rng.uniform(-2.0, 2.0);
        }
        try {
            JetView j = ev.jet2(t, x.data(), dx.data());
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    double hxx = j.hess_xx(i, k);
                    double hxd = j.hess_xdx(i, k);
                    if (!std::isfinite(hxx) || std::fabs(hxx) > hess_tol)
                        affine = false;
                    if (!std::isfinite(hxd) || std::fabs(hxd) > hess_tol) {
                        affine = false;
                        separable = false;
                    }
                }
        } catch (const EvalDomainError&) {
            continue; // sample outside the integrand's domain; skip
        }

        if (!quadratic)
            continue;
        // third directional central difference along a random (x,dx) direction
        Eigen::VectorXd ux(n), ud(n);
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            ux[i] = rng.gaussian();
            ud[i] = rng.gaussian();
            norm2 += ux[i] * ux[i] + ud[i] * ud[i];
        }
        double inv = 1.0 / std::sqrt(norm2);
        ux *= inv;
        ud *= inv;
        const double h = 0.05;
        auto at = [&](double sft) {
            Eigen::VectorXd xs = x + sft * ux, ds = dx + sft * ud;
            return ev.value(t, xs.data(), ds.data());
        };
        try {
            double f2p = at(2 * h), f1p = at(h), f1m = at(-h), f2m = at(-2 * h);
            double d3 = (f2p - 2 * f1p + 2 * f1m - f2m) / (2 * h * h * h);
            double scale = std::max({1.0, std::fabs(f2p), std::fabs(f2m)});
            if (!std::isfinite(d3) || std::fabs(d3) > cubic_tol * scale)
                quadratic = false;
        } catch (const EvalDomainError&) {
            continue;
        }
    }

    StructureInfo info;
    info.affine_in_x = affine;
    info.separable = separable;
    info.quadratic = quadratic;
    info.plan_digest = plan.digest();
    if (affine)
        info.cls = StructureClass::AFFINE_IN_X;
    else if (quadratic)
        info.cls = StructureClass::QUADRATIC;
    else if (separable)
        info.cls = StructureClass::SEPARABLE;
    else
        info.cls = StructureClass::GENERAL;
    return info;
}

} // namespace varmin
