// Linear problem of the quadrimer: the 4x4 operator H, its closed-form
// (doubly degenerate) eigenvalues, the PT-phase classification, and the
// monoparametric family of PT-symmetric eigenvectors with its orthogonal
// pair.
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ptquad/core.hpp"
#include "ptquad/linalg.hpp"

namespace ptquad {

struct LinearSpectrum {
    Complex b_plus;     // +sqrt(2k^2 - gamma^2), or +i sqrt(gamma^2 - 2k^2) when broken
    Complex b_minus;    // the opposite sign
    bool broken;        // gamma > sqrt(2) k
    double gamma_cr1;   // sqrt(2) k
};

inline CMat build_H(const CouplerParams& p) {
    p.validate();
    const Complex ig(0.0, p.gamma);
    const double k = p.k;
    CMat h(4);
    h(0, 0) = -ig; h(0, 1) = k;   h(0, 2) = 0.0; h(0, 3) = k;
    h(1, 0) = k;   h(1, 1) = ig;  h(1, 2) = -k;  h(1, 3) = 0.0;
    h(2, 0) = 0.0; h(2, 1) = -k;  h(2, 2) = -ig; h(2, 3) = k;
    h(3, 0) = k;   h(3, 1) = 0.0; h(3, 2) = k;   h(3, 3) = ig;
    return h;
}

// b_pm = +-sqrt(2k^2 - gamma^2); the broken branch takes +-i sqrt(gamma^2 - 2k^2)
// (principal branch, continuous limit from below).
inline LinearSpectrum eigenvalues_closed(const CouplerParams& p) {
    p.validate();
    // product form: exact zero when gamma equals the representable sqrt(2) k
    const double disc = (p.gamma_cr1() - p.gamma) * (p.gamma_cr1() + p.gamma);
    LinearSpectrum s;
    s.gamma_cr1 = p.gamma_cr1();
    s.broken = disc < 0.0;
    if (!s.broken) {
        s.b_plus = Complex(std::sqrt(disc), 0.0);
    } else {
        s.b_plus = Complex(0.0, std::sqrt(-disc));
    }
    s.b_minus = -s.b_plus;
    return s;
}

// Real linear eigenvalue for a sign in {+1, -1}; throws in the broken phase
// where the PT-eigenvector family is undefined.
inline double btilde(const CouplerParams& p, int sign) {
    const auto s = eigenvalues_closed(p);
    if (s.broken) throw std::invalid_argument("btilde: PT phase is broken (gamma > sqrt(2) k)");
    return sign >= 0 ? s.b_plus.real() : s.b_minus.real();
}

struct PTEigenvector {
    double theta;
    double btilde;
    FieldState v;
};

// The PT-eigenstate family of the eigenvalue btilde, parametrized by a real
// angle theta through a = e^{i theta}:
//   v = (a*, i a*(gamma - i btilde)/k - a, -i a (gamma + i btilde)/k - a*, a).
inline PTEigenvector pt_eigenvector(const CouplerParams& p, double bt, double theta) {
    p.validate();
    if (p.gamma > p.gamma_cr1())
        throw std::invalid_argument("pt_eigenvector: broken PT phase, family undefined");
    const Complex i(0.0, 1.0);
    const Complex a = std::polar(1.0, theta);
    const Complex ac = std::conj(a);
    FieldState v;
    v[0] = ac;
    v[1] = i * ac * Complex(p.gamma, -bt) / p.k - a;
    v[2] = -i * a * Complex(p.gamma, bt) / p.k - ac;
    v[3] = a;
    return {theta, bt, v};
}

// Bilinear-with-conjugate scalar product <g, h> = sum g_j h_j^*.
inline Complex scalar_product(const FieldState& g, const FieldState& h) {
    Complex s(0.0);
    for (int j = 0; j < 4; ++j) s += g[j] * std::conj(h[j]);
    return s;
}

// Orthogonal eigenvector pair within the invariant subspace of btilde:
// theta1 = 0 and theta2 = arctan((2k - btilde)/gamma). The gamma = 0 limit
// makes the theta2 formula singular, and no prescription exists there, so
// it is rejected.
inline std::pair<PTEigenvector, PTEigenvector> orthogonal_pair(const CouplerParams& p, double bt) {
    p.validate();
    if (p.gamma == 0.0)
        throw std::invalid_argument("orthogonal_pair: theta2 formula is singular at gamma = 0");
    const double theta2 = std::atan((2.0 * p.k - bt) / p.gamma);
    return {pt_eigenvector(p, bt, 0.0), pt_eigenvector(p, bt, theta2)};
}

}  // namespace ptquad
