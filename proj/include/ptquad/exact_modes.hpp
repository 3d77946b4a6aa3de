// Closed-form stationary modes: the circularly polarized family (any alpha)
// and the elliptically polarized family of the zero-mismatch case alpha = 1.
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ptquad/core.hpp"
#include "ptquad/spectrum.hpp"

namespace ptquad {

struct ExactModeSpec {
    int sign = +1;  // which linear eigenvalue the family bifurcates from
    double b = 0.0;
    CouplerParams params;
};

// Circular family: rho^2 = 3(b - btilde_pm)/(5 - alpha) and
// e^{2 i phi} = [btilde_pm (1 - i) - gamma (1 + i)]/(2k), which is
// unimodular whenever gamma <= sqrt(2) k. The half-argument convention
// phi = atan2/2 in (-pi/2, pi/2] picks one gauge representative; phi + pi
// gives -w, the same mode class.
inline StationaryMode circular_mode(const ExactModeSpec& spec) {
    spec.params.validate();
    const double bt = btilde(spec.params, spec.sign);  // throws when broken
    const double rho2 = 3.0 * (spec.b - bt) / (5.0 - spec.params.alpha);
    if (rho2 < 0.0)
        throw std::invalid_argument("circular_mode: family does not exist at this b");
    const double rho = std::sqrt(rho2);

    const Complex num(bt - spec.params.gamma, -(bt + spec.params.gamma));
    const Complex e2iphi = num / (2.0 * spec.params.k);
    const double phi = 0.5 * std::arg(e2iphi);

    const Complex w1 = std::polar(rho, phi);
    const Complex i(0.0, 1.0);
    StationaryMode m;
    m.w = {w1, -i * std::conj(w1), i * w1, std::conj(w1)};
    m.b = spec.b;
    m.params = spec.params;
    m.family = spec.sign >= 0 ? Family::CircularPlus : Family::CircularMinus;
    return m;
}

// Elliptic family of the alpha = 1 coupler:
//   w1 = w4^* = rho e^{i phi},  w2 = w3^* = (-1 +- sqrt(2)) rho e^{-i phi},
//   rho^2 = (b - btilde_pm)/(4 -+ 2 sqrt(2)),
//   phi = -+ arcsin(gamma/(sqrt(2) k))/2.
// The stacked signs resolve as: sign=+ takes the upper symbol everywhere
// (factor -1+sqrt2, denominator 4-2sqrt2, phi with the minus), sign=- the
// lower. The pairing is what makes the stationary residual vanish.
inline StationaryMode elliptic_mode_alpha1(const ExactModeSpec& spec) {
    spec.params.validate();
    if (spec.params.alpha != 1)
        throw std::invalid_argument("elliptic_mode_alpha1: requires alpha = 1");
    const double bt = btilde(spec.params, spec.sign);
    const double s2 = std::sqrt(2.0);
    const double factor = (spec.sign >= 0) ? (-1.0 + s2) : (-1.0 - s2);
    const double denom = (spec.sign >= 0) ? (4.0 - 2.0 * s2) : (4.0 + 2.0 * s2);
    const double rho2 = (spec.b - bt) / denom;
    if (rho2 < 0.0)
        throw std::invalid_argument("elliptic_mode_alpha1: family does not exist at this b");
    const double arg = spec.params.gamma / (s2 * spec.params.k);
    if (arg > 1.0) throw std::invalid_argument("elliptic_mode_alpha1: broken PT phase");
    const double phi = (spec.sign >= 0 ? -0.5 : 0.5) * std::asin(arg);

    const double rho = std::sqrt(rho2);
    const Complex w1 = std::polar(rho, phi);
    const Complex w2 = factor * std::polar(rho, -phi);
    StationaryMode m;
    m.w = {w1, w2, std::conj(w2), std::conj(w1)};
    m.b = spec.b;
    m.params = spec.params;
    m.family = spec.sign >= 0 ? Family::EllipticPlus : Family::EllipticMinus;
    return m;
}

}  // namespace ptquad
