// Small-amplitude expansion machinery around the degenerate linear
// eigenvalues: the equal-moduli (circular) root of the PT family, the
// solvability quotients that determine the expansion coefficient B2, the
// elliptic-root scan, and energy-slope predictions at the bifurcation point.
//
// B2 enters w = eps w~(theta) + O(eps^3), b = btilde + eps^2 B2 + ..., and
// the energy slope at the bifurcation is <w~, w~>/B2.
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ptquad/core.hpp"
#include "ptquad/spectrum.hpp"

namespace ptquad {

// Root of the equal-moduli condition: theta = pi/8 - arctan(btilde/gamma)/2.
// At gamma = 0 the limit arctan(+-inf) = +-pi/2 applies.
inline double theta_circular(double bt, double gamma) {
    if (bt == 0.0 && gamma == 0.0)
        throw std::invalid_argument("theta_circular: btilde and gamma both zero");
    const double at = (gamma == 0.0) ? (bt > 0.0 ? M_PI / 2.0 : -M_PI / 2.0)
                                     : std::atan(bt / gamma);
    return M_PI / 8.0 - 0.5 * at;
}

constexpr double B2_circular() { return 5.0 / 3.0; }

// d U / d b at the bifurcation point of the circular family; <w~, w~> = 4
// since all four components have unit modulus.
constexpr double circular_slope() { return 4.0 / B2_circular(); }

// Diagonal of the alpha = 0 nonlinearity matrix F(w).
inline std::array<double, 4> f_diagonal(const FieldState& w) {
    return {std::norm(w[0]) + (2.0 / 3.0) * std::norm(w[2]),
            std::norm(w[1]) + (2.0 / 3.0) * std::norm(w[3]),
            (2.0 / 3.0) * std::norm(w[0]) + std::norm(w[2]),
            (2.0 / 3.0) * std::norm(w[1]) + std::norm(w[3])};
}

// The two Rayleigh-type solvability quotients
//   <F(w~(theta)) w~(theta), (w~(j))^*> / <w~(theta), (w~(j))^*>,  j = 1, 2,
// whose common value at a root theta is the (real) coefficient B2. With the
// scalar product <g, h> = sum g h^*, conjugating the second argument makes
// both pairings plain bilinear sums.
inline std::pair<Complex, Complex> solvability_quotients(const CouplerParams& p, double bt,
                                                         double theta) {
    p.validate();
    if (p.gamma == 0.0)
        throw std::invalid_argument("solvability_quotients: gamma = 0 has no orthogonal pair");
    const auto wt = pt_eigenvector(p, bt, theta).v;
    const auto [e1, e2] = orthogonal_pair(p, bt);
    const auto f = f_diagonal(wt);

    Complex q[2];
    const FieldState* basis[2] = {&e1.v, &e2.v};
    for (int j = 0; j < 2; ++j) {
        Complex num(0.0), den(0.0);
        for (int m = 0; m < 4; ++m) {
            num += f[m] * wt[m] * (*basis[j])[m];
            den += wt[m] * (*basis[j])[m];
        }
        if (std::abs(den) < 1e-12)
            throw std::runtime_error("solvability_quotients: vanishing denominator");
        q[j] = num / den;
    }
    return {q[0], q[1]};
}

struct EllipticRoot {
    double theta;
    double B2;
};

namespace detail {

// The two equal-moduli theta classes in [0, pi): phi0/2 +- pi/8 with
// phi0 = atan2(gamma, btilde). Both carry B2 = 5/3 and belong to the
// circular family's linear limit, so the elliptic scan excludes them.
inline std::array<double, 2> circular_theta_classes(double bt, double gamma) {
    const double phi0 = std::atan2(gamma, bt);
    auto wrap = [](double t) {
        t = std::fmod(t, M_PI);
        if (t < 0.0) t += M_PI;
        return t;
    };
    return {wrap(phi0 / 2.0 - M_PI / 8.0), wrap(phi0 / 2.0 + M_PI / 8.0)};
}

inline double quotient_mismatch(const CouplerParams& p, double bt, double theta, bool& valid) {
    try {
        const auto [q1, q2] = solvability_quotients(p, bt, theta);
        valid = true;
        return (q1 - q2).real();
    } catch (const std::runtime_error&) {
        valid = false;
        return 0.0;
    }
}

}  // namespace detail

// All roots of the first solvability equality on theta in [0, pi) that are
// not equal-moduli (circular) configurations. Scan at resolution 1e-3,
// bracket sign changes of the real quotient mismatch (the quotients are
// identically real along the PT family), refine by bisection to 1e-12, and
// reject brackets that close on a pole instead of a root.
inline std::vector<EllipticRoot> elliptic_roots(const CouplerParams& p, double bt) {
    p.validate();
    if (p.gamma == 0.0) throw std::invalid_argument("elliptic_roots: gamma must be positive");
    if (p.gamma > p.gamma_cr1())
        throw std::invalid_argument("elliptic_roots: broken PT phase");

    const double step = 1e-3;
    const auto circ = detail::circular_theta_classes(bt, p.gamma);
    std::vector<EllipticRoot> roots;

    bool valid_prev = false;
    double f_prev = 0.0;
    for (double th = 0.0; th < M_PI; th += step) {
        bool valid = false;
        const double f = detail::quotient_mismatch(p, bt, th, valid);
        if (valid && valid_prev && f_prev * f < 0.0) {
            double lo = th - step, hi = th, flo = f_prev;
            for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
                const double mid = 0.5 * (lo + hi);
                bool vm = false;
                const double fm = detail::quotient_mismatch(p, bt, mid, vm);
                if (!vm) break;
                if (flo * fm <= 0.0) hi = mid;
                else { lo = mid; flo = fm; }
            }
            const double th_root = 0.5 * (lo + hi);
            try {
                const auto [q1, q2] = solvability_quotients(p, bt, th_root);
                const bool is_root = std::abs(q1 - q2) < 1e-8 && std::abs(q1.imag()) < 1e-8;
                const bool is_circ = std::abs(th_root - circ[0]) < 1e-6 ||
                                     std::abs(th_root - circ[1]) < 1e-6;
                if (is_root && !is_circ) roots.push_back({th_root, q1.real()});
            } catch (const std::runtime_error&) {
                // pole, not a root
            }
        }
        valid_prev = valid;
        f_prev = f;
    }
    return roots;
}

// The elliptic-family root used for seeding and predictions: the smallest
// theta among the non-circular roots (the one with B2 < 5/3 in the sampled
// regime). Returns nullopt past the secondary critical point gamma = k,
// where the family ceases to exist; throws if the scan fails inside the
// existence region.
inline std::optional<EllipticRoot> elliptic_root(const CouplerParams& p, double bt) {
    p.validate();
    if (p.gamma <= 0.0 || p.gamma > p.gamma_cr2()) return std::nullopt;
    const auto roots = elliptic_roots(p, bt);
    if (roots.empty())
        throw std::runtime_error("elliptic_root: no root found although 0 < gamma <= k");
    return roots.front();
}

struct BifurcationPrediction {
    double btilde;
    double theta;
    double B2;
    double slope;  // dU/db at the bifurcation point, <w~(theta), w~(theta)>/B2
    Family family;
};

inline BifurcationPrediction circular_prediction(const CouplerParams& p, int sign) {
    const double bt = btilde(p, sign);
    const double th = theta_circular(bt, p.gamma);
    return {bt, th, B2_circular(), circular_slope(),
            sign >= 0 ? Family::CircularPlus : Family::CircularMinus};
}

inline std::optional<BifurcationPrediction> elliptic_prediction(const CouplerParams& p, int sign) {
    const double bt = btilde(p, sign);
    const auto root = elliptic_root(p, bt);
    if (!root) return std::nullopt;
    const auto wt = pt_eigenvector(p, bt, root->theta).v;
    const double n2 = scalar_product(wt, wt).real();
    return BifurcationPrediction{bt, root->theta, root->B2, n2 / root->B2,
                                 sign >= 0 ? Family::EllipticPlus : Family::EllipticMinus};
}

}  // namespace ptquad
