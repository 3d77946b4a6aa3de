// Linear stability of stationary modes in the rotating frame: substituting
// u = e^{ibz}(w + eps(z)) into the autonomous dynamics and discarding
// O(eps^2) gives d(eps)/dz = i A eps + i B eps^*, with (A, B) the Wirtinger
// blocks of the stationary residual. The real 8x8 form of that operator is
// what gets diagonalized.
//
// Every stationary mode carries a structural zero block: the U(1) phase
// direction i w is neutral, and the family tangent pairs with it in a
// Jordan chain, so the zero eigenvalue has algebraic multiplicity two.
// Instability counts exempt that block and count eigenvalues with
// Re lambda above tol.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ptquad/core.hpp"
#include "ptquad/linalg.hpp"

namespace ptquad {

struct StabilityOptions {
    double tol = 1e-8;          // growth-rate threshold on Re lambda
    double zero_guard = 1e-3;   // largest |lambda| still treated as the zero block
    double residual_tol = 1e-10;
};

struct StabilityReport {
    std::array<Complex, 8> eigenvalues{};
    double max_growth = 0.0;  // max Re lambda outside the structural zero block
    int n_unstable = 0;       // eigenvalues with Re lambda > tol, zero block exempt
    bool stable = true;
};

// Real 8x8 linearization about a stationary mode. Rejects modes that do not
// actually solve the stationary system and non-autonomous configurations.
inline RMat linearization_matrix(const StationaryMode& m, double residual_tol = 1e-10) {
    m.params.validate();
    if (m.params.alpha == 0 && (m.params.delta1 != 0.0 || m.params.delta2 != 0.0))
        throw std::invalid_argument(
            "linearization_matrix: non-autonomous configuration (explicit mismatch)");
    if (residual_norm(m) > residual_tol)
        throw std::invalid_argument("linearization_matrix: state is not stationary");

    const auto blocks = stationary_jacobian_blocks(m.params, m.b, m.w);
    const Complex i(0.0, 1.0);
    CMat iA(4), iB(4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            iA(r, c) = i * blocks.A(r, c);
            iB(r, c) = i * blocks.B(r, c);
        }
    return real_form(iA, iB);
}

inline StabilityReport stability_report(const StationaryMode& m, const StabilityOptions& opts = {}) {
    const RMat M = linearization_matrix(m, opts.residual_tol);
    const auto eig = eigen_numeric(M);

    StabilityReport rep;
    std::copy(eig.begin(), eig.end(), rep.eigenvalues.begin());

    // The structural zero block has algebraic multiplicity two (phase mode
    // plus its Jordan partner) and splits numerically by roughly
    // sqrt(residual * norm). The zero-mismatch coupler carries an extra
    // polarization-rotation symmetry whose orbit is distinct from the phase
    // orbit for non-circular modes, doubling the block there. Exempt that
    // many smallest eigenvalues, guarded so nothing of dynamical size is
    // ever swallowed.
    int zero_rank = 2;
    if (m.params.alpha == 1) {
        const double a1 = std::abs(m.w[0]), a2 = std::abs(m.w[1]);
        if (std::abs(a1 - a2) > 1e-8 * std::max(1.0, a1 + a2)) zero_rank = 4;
    }
    std::array<int, 8> order{0, 1, 2, 3, 4, 5, 6, 7};
    std::sort(order.begin(), order.end(),
              [&eig](int a, int b) { return std::abs(eig[a]) < std::abs(eig[b]); });
    std::array<bool, 8> exempt{};
    for (int r = 0; r < zero_rank; ++r)
        if (std::abs(eig[order[r]]) <= opts.zero_guard) exempt[order[r]] = true;

    double max_growth = -std::numeric_limits<double>::infinity();
    int n_unstable = 0;
    for (int i = 0; i < 8; ++i) {
        if (exempt[i]) continue;
        max_growth = std::max(max_growth, eig[i].real());
        if (eig[i].real() > opts.tol) ++n_unstable;
    }
    rep.max_growth = std::isfinite(max_growth) ? max_growth : 0.0;
    rep.n_unstable = n_unstable;
    rep.stable = rep.max_growth <= opts.tol;
    return rep;
}

}  // namespace ptquad
