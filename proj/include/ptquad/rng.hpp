// Deterministic random draws for seeding protocols and perturbations.
// std::mt19937_64 is bit-stable across platforms; the Gaussian transform is
// written out explicitly because std::normal_distribution is not.
#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "ptquad/core.hpp"

namespace ptquad {

inline Complex gaussian_complex(std::mt19937_64& rng) {
    const double u1 = (rng() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    const double u2 = (rng() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

// Unit-norm complex 4-vector, a deterministic function of the seed.
inline FieldState random_unit_state(unsigned long long seed) {
    std::mt19937_64 rng(seed);
    FieldState r;
    double n2 = 0.0;
    for (int j = 0; j < 4; ++j) {
        r[j] = gaussian_complex(rng);
        n2 += std::norm(r[j]);
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (int j = 0; j < 4; ++j) r[j] *= inv;
    return r;
}

}  // namespace ptquad
