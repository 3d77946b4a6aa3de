// Coupled-mode model of the PT-symmetric birefringent coupler (quadrimer):
// parameters, four-component field states, the dynamical right-hand side,
// the stationary residual, the PT operation, and power diagnostics.
//
// Conventions fixed here once and used everywhere:
//  * The evolution system is written as i du/dz = RHS; this module exposes
//    du/dz = -i RHS so integrators consume it directly.
//  * alpha = 0 drops the four-wave mixing terms entirely (large-mismatch
//    limit); alpha = 1 keeps them with coefficient 1/3 and zero mismatches.
//    An explicit override re-enables the e^{+-i Delta z} terms at alpha = 0
//    for exploratory runs.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "ptquad/linalg.hpp"

namespace ptquad {

using FieldState = std::array<Complex, 4>;

struct CouplerParams {
    double k = 1.0;       // inter-mode coupling, > 0
    double gamma = 0.0;   // gain/loss strength, >= 0
    int alpha = 0;        // four-wave switch: 0 (large mismatch) or 1 (zero mismatch)
    double delta1 = 0.0;  // polarization mismatch rates; only the dynamics
    double delta2 = 0.0;  // with the override enabled ever sees them

    void validate() const {
        if (!(k > 0.0)) throw std::invalid_argument("CouplerParams: k must be > 0");
        if (!(gamma >= 0.0)) throw std::invalid_argument("CouplerParams: gamma must be >= 0");
        if (alpha != 0 && alpha != 1)
            throw std::invalid_argument("CouplerParams: alpha must be 0 or 1");
        if (alpha == 1 && (delta1 != 0.0 || delta2 != 0.0))
            throw std::invalid_argument("CouplerParams: alpha = 1 requires zero mismatches");
        if (!std::isfinite(k) || !std::isfinite(gamma) || !std::isfinite(delta1) ||
            !std::isfinite(delta2))
            throw std::invalid_argument("CouplerParams: non-finite entry");
    }

    double gamma_cr1() const { return std::sqrt(2.0) * k; }  // linear PT-breaking point
    double gamma_cr2() const { return k; }                   // elliptic-family threshold
};

enum class Family { CircularPlus, CircularMinus, EllipticPlus, EllipticMinus, Numeric };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::CircularPlus: return "circular+";
        case Family::CircularMinus: return "circular-";
        case Family::EllipticPlus: return "elliptic+";
        case Family::EllipticMinus: return "elliptic-";
        case Family::Numeric: return "numeric";
    }
    return "?";
}

struct StationaryMode {
    FieldState w{};
    double b = 0.0;  // real propagation constant
    CouplerParams params;
    Family family = Family::Numeric;
};

inline bool finite(const FieldState& u) {
    for (const auto& v : u)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

inline double power(const FieldState& u) {
    return std::norm(u[0]) + std::norm(u[1]) + std::norm(u[2]) + std::norm(u[3]);
}

// Exact dU/dz along trajectories: 2 gamma (|u1|^2 + |u3|^2 - |u2|^2 - |u4|^2).
// The four-wave terms cancel pairwise in dU/dz for any mismatch, so this
// holds for every alpha/Delta combination.
inline double power_imbalance(const CouplerParams& p, const FieldState& u) {
    return 2.0 * p.gamma * (std::norm(u[0]) + std::norm(u[2]) - std::norm(u[1]) - std::norm(u[3]));
}

// P applied after elementwise conjugation: (u4*, u3*, u2*, u1*).
inline FieldState pt_apply(const FieldState& u) {
    return {std::conj(u[3]), std::conj(u[2]), std::conj(u[1]), std::conj(u[0])};
}

namespace detail {
// Site j couples nonlinearly to its co-propagating orthogonal polarization.
inline constexpr int kPartner[4] = {2, 3, 0, 1};
}  // namespace detail

namespace detail {

// Validation-free right-hand side for integrator inner loops.
inline FieldState rhs_unchecked(const CouplerParams& p, double z, const FieldState& u,
                                bool four_wave) {
    const Complex i(0.0, 1.0);
    const double k = p.k, g = p.gamma;

    std::array<Complex, 4> rhs;
    rhs[0] = -k * (u[1] + u[3]) + i * g * u[0] -
             (std::norm(u[0]) + (2.0 / 3.0) * std::norm(u[2])) * u[0];
    rhs[1] = -k * (u[0] - u[2]) - i * g * u[1] -
             (std::norm(u[1]) + (2.0 / 3.0) * std::norm(u[3])) * u[1];
    rhs[2] = -k * (u[3] - u[1]) + i * g * u[2] -
             ((2.0 / 3.0) * std::norm(u[0]) + std::norm(u[2])) * u[2];
    rhs[3] = -k * (u[0] + u[2]) - i * g * u[3] -
             ((2.0 / 3.0) * std::norm(u[1]) + std::norm(u[3])) * u[3];
    if (four_wave) {
        const Complex e1 = std::polar(1.0, p.delta1 * z);
        const Complex e2 = std::polar(1.0, p.delta2 * z);
        rhs[0] -= (1.0 / 3.0) * u[2] * u[2] * std::conj(u[0]) * e1;
        rhs[1] -= (1.0 / 3.0) * u[3] * u[3] * std::conj(u[1]) * e2;
        rhs[2] -= (1.0 / 3.0) * u[0] * u[0] * std::conj(u[2]) * std::conj(e1);
        rhs[3] -= (1.0 / 3.0) * u[1] * u[1] * std::conj(u[3]) * std::conj(e2);
    }

    FieldState du;
    for (int j = 0; j < 4; ++j) du[j] = -i * rhs[j];
    return du;
}

}  // namespace detail

// du/dz for the full dynamical system. The four-wave terms enter when
// alpha = 1 (with Delta = 0 by the parameter invariant) or when the
// exploratory override keeps them at alpha = 0 with their stated
// z-dependence.
inline FieldState rhs_dynamic(const CouplerParams& p, double z, const FieldState& u,
                              bool four_wave_override = false) {
    p.validate();
    if (!finite(u)) throw std::invalid_argument("rhs_dynamic: non-finite field state");
    return detail::rhs_unchecked(p, z, u, (p.alpha == 1) || four_wave_override);
}

// Right-hand side of the stationary system (everything except b w), i.e.
// the algebraic system reads b w = stationary_rhs(w). Valid for both alpha
// limits; b may be complex (ghost states).
inline FieldState stationary_rhs(const CouplerParams& p, const FieldState& w) {
    const Complex i(0.0, 1.0);
    const double k = p.k, g = p.gamma;
    const double a3 = p.alpha / 3.0;

    FieldState r;
    r[0] = k * (w[1] + w[3]) - i * g * w[0];
    r[1] = k * (w[0] - w[2]) + i * g * w[1];
    r[2] = k * (w[3] - w[1]) - i * g * w[2];
    r[3] = k * (w[0] + w[2]) + i * g * w[3];
    for (int j = 0; j < 4; ++j) {
        const int pj = detail::kPartner[j];
        r[j] += (std::norm(w[j]) + (2.0 / 3.0) * std::norm(w[pj])) * w[j];
        r[j] += a3 * w[pj] * w[pj] * std::conj(w[j]);
    }
    return r;
}

inline FieldState stationary_residual(const CouplerParams& p, Complex b, const FieldState& w) {
    p.validate();
    if (!finite(w)) throw std::invalid_argument("stationary_residual: non-finite field state");
    FieldState r = stationary_rhs(p, w);
    for (int j = 0; j < 4; ++j) r[j] -= b * w[j];
    return r;
}

inline FieldState stationary_residual(const CouplerParams& p, double b, const FieldState& w) {
    return stationary_residual(p, Complex(b, 0.0), w);
}

inline double max_abs(const FieldState& r) {
    double m = 0.0;
    for (const auto& v : r) m = std::max(m, std::abs(v));
    return m;
}

inline double residual_norm(const StationaryMode& m) {
    return max_abs(stationary_residual(m.params, m.b, m.w));
}

// Wirtinger derivatives of the stationary residual R(w) = rhs(w) - b w:
// A = dR/dw (includes the linear operator and -b on the diagonal),
// B = dR/dw*. These drive both the Newton corrector and the stability
// linearization, so the model's derivative lives in exactly one place.
struct JacobianBlocks {
    CMat A;
    CMat B;
};

inline JacobianBlocks stationary_jacobian_blocks(const CouplerParams& p, double b,
                                                 const FieldState& w) {
    const Complex i(0.0, 1.0);
    const double k = p.k, g = p.gamma;
    const double a3 = p.alpha / 3.0;

    CMat A(4), B(4);
    // Linear part.
    A(0, 0) = -i * g; A(0, 1) = k;      A(0, 3) = k;
    A(1, 0) = k;      A(1, 1) = i * g;  A(1, 2) = -k;
    A(2, 1) = -k;     A(2, 2) = -i * g; A(2, 3) = k;
    A(3, 0) = k;      A(3, 2) = k;      A(3, 3) = i * g;

    for (int j = 0; j < 4; ++j) {
        const int pj = detail::kPartner[j];
        A(j, j) += 2.0 * std::norm(w[j]) + (2.0 / 3.0) * std::norm(w[pj]) - b;
        A(j, pj) += (2.0 / 3.0) * std::conj(w[pj]) * w[j] + 2.0 * a3 * w[pj] * std::conj(w[j]);
        B(j, j) = w[j] * w[j] + a3 * w[pj] * w[pj];
        B(j, pj) = (2.0 / 3.0) * w[pj] * w[j];
    }
    return {A, B};
}

// Realification of a C-linear + antilinear pair: the real 8x8 matrix of
// eps -> A eps + B eps* acting on (Re eps, Im eps).
inline RMat real_form(const CMat& a, const CMat& b) {
    RMat m(8);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double P = a(i, j).real(), Q = a(i, j).imag();
            const double R = b(i, j).real(), S = b(i, j).imag();
            m(i, j) = P + R;
            m(i, j + 4) = -(Q - S);
            m(i + 4, j) = Q + S;
            m(i + 4, j + 4) = P - R;
        }
    return m;
}

}  // namespace ptquad
