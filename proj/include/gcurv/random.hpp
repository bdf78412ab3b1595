#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace gcurv {

/// Uniform double in [-1, 1) built from the top 53 bits of the generator
/// output. Unlike std::uniform_real_distribution this is identical across
/// standard library implementations, which keeps seeded reports portable.
inline double uniform_pm1(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53; // [0,1)
    return 2.0 * u - 1.0;
}

inline Eigen::VectorXd random_function(int n, std::mt19937_64& rng) {
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = uniform_pm1(rng);
    return f;
}

} // namespace gcurv
