#pragma once

#include "varmin/expr.hpp"
#include "varmin/sampling.hpp"

namespace varmin {

// Sampled structural classification of an integrand in (x, dx). The label is
// the most specific class that the samples support; the booleans keep the
// individual properties since the classes do not nest linearly.
enum class StructureClass { AFFINE_IN_X, QUADRATIC, SEPARABLE, GENERAL };

std::string to_string(StructureClass c);

struct StructureInfo {
    StructureClass cls = StructureClass::GENERAL;
    bool affine_in_x = false; // hess_xx == 0 and hess_xdx == 0 on samples
    bool separable = false;   // hess_xdx == 0 on samples
    bool quadratic = false;   // third directional differences vanish
    std::string plan_digest;
};

// Decided by sampling (never a proof): hess blocks at plan-driven points with
// absolute tolerance 1e-10; the quadratic probe uses third directional
// central differences with tolerance 1e-8 (scale-normalized).
StructureInfo classify_structure(const Expr& e, const SamplingPlan& plan);

} // namespace varmin
