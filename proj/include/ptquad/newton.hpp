// Damped Newton corrector for the stationary system in the 8-real-dimensional
// formulation (Re w, Im w), with the global U(1) phase fixed by the
// constraint Im(w_m) = 0 on the largest-modulus component of the seed. The
// gauge row replaces the residual component made redundant by the phase
// invariance, giving a square, generically nonsingular system.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "ptquad/core.hpp"
#include "ptquad/linalg.hpp"

namespace ptquad {

struct NewtonOptions {
    double tol = 1e-12;        // residual infinity-norm
    int max_iter = 50;
    double singular_tol = 1e-10;  // smallest acceptable LU pivot
};

namespace detail {

inline int largest_component(const FieldState& w) {
    int m = 0;
    for (int j = 1; j < 4; ++j)
        if (std::abs(w[j]) > std::abs(w[m])) m = j;
    return m;
}

// Residual with the gauge row substituted: component 4+m holds Im(w_m).
inline std::array<double, kMaxRealDim> gauge_residual(const CouplerParams& p, double b,
                                                      const FieldState& w, int m) {
    const FieldState r = stationary_residual(p, b, w);
    std::array<double, kMaxRealDim> out{};
    for (int j = 0; j < 4; ++j) {
        out[j] = r[j].real();
        out[j + 4] = r[j].imag();
    }
    out[4 + m] = w[m].imag();
    return out;
}

inline double inf_norm8(const std::array<double, kMaxRealDim>& v) {
    double n = 0.0;
    for (int j = 0; j < 8; ++j) n = std::max(n, std::abs(v[j]));
    return n;
}

}  // namespace detail

// Newton iteration from seed w0 at fixed parameters and propagation
// constant. Throws std::invalid_argument on a zero/non-finite seed,
// std::runtime_error("degenerate point") when the gauge-fixed Jacobian is
// singular beyond the U(1) direction, and a plain runtime_error when 50
// iterations do not reach the tolerance.
inline StationaryMode newton_solve(const CouplerParams& p, double b, const FieldState& w0,
                                   const NewtonOptions& opts = {}) {
    p.validate();
    if (!finite(w0)) throw std::invalid_argument("newton_solve: non-finite seed");
    if (power(w0) == 0.0) throw std::invalid_argument("newton_solve: zero seed");

    const int m = detail::largest_component(w0);
    FieldState w = w0;
    // Start on the gauge slice: rotate the seed so w_m is real positive.
    // This keeps the result in the seed's U(1) class.
    const Complex rot = std::polar(1.0, -std::arg(w[m]));
    for (int j = 0; j < 4; ++j) w[j] *= rot;

    for (int it = 0; it < opts.max_iter; ++it) {
        const FieldState full = stationary_residual(p, b, w);
        auto r = detail::gauge_residual(p, b, w, m);
        const double rn = detail::inf_norm8(r);
        if (rn < opts.tol) {
            // The gauge row replaced one residual component; a genuine root
            // must satisfy it too, else this is a root of 7 equations only.
            if (max_abs(full) < opts.tol) return StationaryMode{w, b, p, Family::Numeric};
            throw std::runtime_error("newton_solve: spurious gauge-slice root");
        }

        const auto blocks = stationary_jacobian_blocks(p, b, w);
        RMat J = real_form(blocks.A, blocks.B);
        for (int j = 0; j < 8; ++j) J(4 + m, j) = 0.0;
        J(4 + m, 4 + m) = 1.0;

        std::array<double, kMaxRealDim> dx{};
        for (int j = 0; j < 8; ++j) dx[j] = -r[j];
        const double pivot = lu_solve(J, dx);
        if (pivot < opts.singular_tol)
            throw std::runtime_error("newton_solve: degenerate point (singular Jacobian)");

        // Damping: halve until the residual satisfies an Armijo-style
        // decrease; accept the full step as a last resort.
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            FieldState trial = w;
            for (int j = 0; j < 4; ++j)
                trial[j] += lambda * Complex(dx[j], dx[j + 4]);
            const auto rt = detail::gauge_residual(p, b, trial, m);
            if (detail::inf_norm8(rt) <= (1.0 - 0.5 * lambda) * rn + 1e-15) {
                w = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            for (int j = 0; j < 4; ++j) w[j] += Complex(dx[j], dx[j + 4]);
        }
    }

    const auto r = detail::gauge_residual(p, b, w, m);
    if (detail::inf_norm8(r) < opts.tol && max_abs(stationary_residual(p, b, w)) < opts.tol)
        return {w, b, p, Family::Numeric};
    throw std::runtime_error("newton_solve: no convergence within iteration limit");
}

// Rotates w by the global phase that brings it closest (in the 4-norm) to
// the reference state; used for gauge-independent comparisons.
inline FieldState gauge_align(const FieldState& w, const FieldState& ref) {
    Complex s(0.0);
    for (int j = 0; j < 4; ++j) s += w[j] * std::conj(ref[j]);
    if (std::abs(s) == 0.0) return w;
    const Complex phase = std::conj(s) / std::abs(s);
    FieldState out;
    for (int j = 0; j < 4; ++j) out[j] = phase * w[j];
    return out;
}

inline double gauge_distance(const FieldState& a, const FieldState& b) {
    const FieldState al = gauge_align(a, b);
    double d2 = 0.0;
    for (int j = 0; j < 4; ++j) d2 += std::norm(al[j] - b[j]);
    return std::sqrt(d2);
}

}  // namespace ptquad
