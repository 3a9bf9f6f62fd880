#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace varmin::detail {

// splitmix64-based generator; deterministic and platform-stable, which keeps
// reports byte-identical for a fixed seed.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; } // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double gaussian() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300)
            u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

inline Eigen::VectorXd draw_in_ball(Rng& rng, int n, double radius) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = rng.gaussian();
    double norm = v.norm();
    if (norm < 1e-300)
        v.setZero();
    else
        v *= radius * std::pow(rng.uniform(), 1.0 / n) / norm;
    return v;
}

} // namespace varmin::detail
