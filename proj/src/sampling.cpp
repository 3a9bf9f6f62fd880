#include "varmin/sampling.hpp"

#include "varmin/detail/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace varmin {

namespace {

using detail::Rng;
using detail::draw_in_ball;

void push(PointSet& set, Eigen::VectorXd v) {
    set.norms.push_back(v.norm());
    set.points.push_back(std::move(v));
}

PointSet build_radial(const SamplingPlan& p, std::uint64_t salt) {
    PointSet set;
    Rng rng(p.seed ^ salt);
    const int n = p.n;
    push(set, Eigen::VectorXd::Zero(n));
    // ball grid
    if (n == 1) {
        for (int i = 0; i < p.ball_grid; ++i) {
            double v = -p.delta + 2.0 * p.delta * i / (p.ball_grid - 1);
            if (v != 0.0)
                push(set, Eigen::VectorXd::Constant(1, v));
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (double s : {-1.0, -0.5, 0.5, 1.0})
                push(set, s * p.delta * Eigen::VectorXd::Unit(n, i));
    }
    for (int k = 0; k < p.ball_draws; ++k)
        push(set, draw_in_ball(rng, n, p.delta));
    // a thin shell out to 2*delta so the delta-sweep has samples
    for (int k = 0; k < 32; ++k)
        push(set, draw_in_ball(rng, n, 2.0 * p.delta));
    // global tiers
    for (double r : p.global_radii) {
        for (int i = 0; i < n; ++i)
            for (double s : {-1.0, 1.0})
                push(set, s * r * Eigen::VectorXd::Unit(n, i));
        for (int k = 0; k < p.tier_draws; ++k)
            push(set, draw_in_ball(rng, n, r));
    }
    return set;
}

void add_cluster_nodes(std::vector<TimeNode>& nodes, double anchor, int dir,
                       double span, int depth, double lo, double hi) {
    for (int j = 0; j < depth; ++j) {
        double off = span * std::ldexp(1.0, -(j + 4)); // span/16 ... span/2^(depth+3)
        double t = anchor + dir * off;
        if (t > lo && t < hi)
            nodes.push_back({t, 0, true});
    }
}

std::vector<int> decimate(std::size_t total, int want) {
    std::vector<int> idx;
    if (want <= 0 || total == 0)
        return idx;
    if (static_cast<std::size_t>(want) >= total) {
        for (std::size_t i = 0; i < total; ++i)
            idx.push_back(static_cast<int>(i));
        return idx;
    }
    for (int k = 0; k < want; ++k)
        idx.push_back(static_cast<int>(k * total / want));
    return idx;
}

} // namespace

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::HOLDS:
        return "HOLDS";
    case Verdict::FAILS:
        return "FAILS";
    default:
        return "INCONCLUSIVE";
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string SamplingPlan::digest() const {
    std::ostringstream os;
    os.precision(17);
    os << n << '|' << t0 << '|' << t1 << '|' << delta << '|' << pass_tol << '|'
       << fail_tol << '|' << seed << '|' << t_count << '|' << cluster_depth
       << '|' << ball_grid << '|' << ball_draws << '|' << tier_draws << '|'
       << theta_grid_count << '|' << theta_draws << '|' << suff_t_count << '|'
       << suff_theta_count << '|' << suff_xi_count << '|' << suff_eta_count;
    for (double r : global_radii)
        os << '|' << r;
    for (double c : corners)
        os << '|' << c;
    return hex64(fnv1a(os.str()));
}

SamplingPlan SamplingPlan::make(int n, double t0, double t1,
                                std::vector<double> corners,
                                std::uint64_t seed, double delta) {
    SamplingPlan p;
    p.n = n;
    p.t0 = t0;
    p.t1 = t1;
    p.corners = std::move(corners);
    p.seed = seed;
    p.delta = delta;
    p.rebuild();
    return p;
}

void SamplingPlan::rebuild() {
    const double span = t1 - t0;
    std::sort(corners.begin(), corners.end());

    auto build_tgrid = [&](int count, int depth) {
        std::vector<TimeNode> nodes;
        for (int i = 0; i < count; ++i) {
            double t = t0 + span * i / (count - 1);
            bool is_corner = false;
            for (double c : corners)
                if (t == c)
                    is_corner = true;
            if (is_corner)
                continue; // corners get explicit one-sided nodes below
            int side = (i == 0) ? +1 : (i == count - 1 ? -1 : 0);
            nodes.push_back({t, side, false});
        }
        add_cluster_nodes(nodes, t0, +1, span, depth, t0, t1);
        add_cluster_nodes(nodes, t1, -1, span, depth, t0, t1);
        for (double c : corners) {
            nodes.push_back({c, -1, false});
            nodes.push_back({c, +1, false});
            add_cluster_nodes(nodes, c, -1, span, depth, t0, t1);
            add_cluster_nodes(nodes, c, +1, span, depth, t0, t1);
        }
        std::stable_sort(nodes.begin(), nodes.end(),
                         [](const TimeNode& a, const TimeNode& b) {
                             if (a.t != b.t)
                                 return a.t < b.t;
                             return a.side < b.side;
                         });
        return nodes;
    };

    t_nodes = build_tgrid(t_count, cluster_depth);
    suff_t_nodes = build_tgrid(suff_t_count, suff_cluster_depth);

    xi = build_radial(*this, 0x5eedf00d);
    eta = build_radial(*this, 0xe7ae7a11);

    theta_grid.clear();
    for (int i = 1; i <= theta_grid_count; ++i)
        theta_grid.push_back(double(i) / double(theta_grid_count + 1));
    Rng rng(seed ^ 0x7e7a1234);
    for (int k = 0; k < theta_draws; ++k)
        theta_grid.push_back(rng.uniform(0.0, 1.0));

    suff_theta.clear();
    for (int i = 1; i <= suff_theta_count; ++i)
        suff_theta.push_back(double(i) / double(suff_theta_count + 1));

    suff_xi_idx = decimate(xi.points.size(), suff_xi_count);
    suff_eta_idx = decimate(eta.points.size(), suff_eta_count);
}

} // namespace varmin
