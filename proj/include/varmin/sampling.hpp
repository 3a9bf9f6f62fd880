#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace varmin {

// Deterministic sampling plan for every quantified check: grids and seeded
// draws over (t, xi, eta, theta) plus the ball radius delta. Two plans built
// from the same (geometry, seed, knobs) are identical, and every report
// carries the plan digest so a verdict can be reproduced exactly.

enum class Verdict { HOLDS, FAILS, INCONCLUSIVE };

std::string to_string(Verdict v);

struct Witness {
    double t = 0.0;
    int side = 0; // -1 left, +1 right, 0 two-sided
    std::optional<Eigen::VectorXd> xi;
    std::optional<Eigen::VectorXd> eta;
    std::optional<double> theta;
};

// Sampled verdict for one condition. Margins are scale-normalized: each
// sample's raw value is divided by max(1, local term magnitude) before the
// min-reduction, so tolerances stay meaningful when individual terms grow
// large (e.g. near an admissible endpoint singularity of Q).
struct ConditionReport {
    std::string condition;
    Verdict verdict = Verdict::INCONCLUSIVE;
    double worst_margin = 0.0;
    std::optional<Witness> witness;
    std::string plan_digest;
    std::vector<double> degenerate_points;
    std::string note;
};

struct TimeNode {
    double t = 0.0;
    int side = 0;
    bool clustered = false;
};

struct PointSet {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> norms; // Euclidean, aligned with points
};

struct SamplingPlan {
    // geometry
    int n = 1;
    double t0 = 0.0, t1 = 1.0;
    std::vector<double> corners;

    // knobs
    double delta = 0.5;
    double pass_tol = 1e-9;
    double fail_tol = 1e-7;
    std::vector<double> global_radii = {1.0, 3.0, 10.0};
    int t_count = 512;
    int cluster_depth = 16;
    int ball_grid = 33;
    int ball_draws = 256;
    int tier_draws = 64;
    int theta_grid_count = 19;
    int theta_draws = 32;
    std::uint64_t seed = 2026u;

    // decimated sizes used by the 4-way sufficiency scans (full grids over
    // the Cartesian product are out of reach at desk scale)
    int suff_t_count = 96;
    int suff_cluster_depth = 10;
    int suff_theta_count = 10;
    int suff_xi_count = 48;
    int suff_eta_count = 48;

    // built artifacts
    std::vector<TimeNode> t_nodes;      // full grid, corner-side aware
    std::vector<TimeNode> suff_t_nodes; // decimated grid for 4-way scans
    PointSet xi;                        // ball + global tiers, includes 0
    PointSet eta;
    std::vector<double> theta_grid;     // in (0,1)
    std::vector<double> suff_theta;     // decimated
    std::vector<int> suff_xi_idx;       // indices into xi
    std::vector<int> suff_eta_idx;      // indices into eta

    double r_global() const { return global_radii.empty() ? delta : global_radii.back(); }
    std::string digest() const;

    // Build all grids and draws. `corners` are interior breakpoints of the
    // candidate (one-sided nodes are added for each).
    static SamplingPlan make(int n, double t0, double t1,
                             std::vector<double> corners,
                             std::uint64_t seed = 2026u, double delta = 0.5);
    void rebuild(); // after editing knobs
};

// FNV-1a over a string; used for plan and problem digests.
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

} // namespace varmin
