// Ghost states: solutions of the stationary system with complex propagation
// constant b = B e^{i phi_b}, sought through the ansatz
//   w1 = c1 e^{i phi1},  w2 = c2 e^{i phi2},  w3 = i w1,  w4 = i w2.
// Under the ansatz the four stationary equations collapse to two complex
// ones,
//   b w1 = k(1+i) w2 - i gamma w1 + nu c1^2 w1,
//   b w2 = k(1-i) w1 + i gamma w2 + nu c2^2 w2,     nu = (5 - alpha)/3,
// whose real/imaginary parts give the consistency conditions solved here.
// (The printed sin/cos(phi2-phi1) conditions carry the propagation-constant
// terms with a factor 3, consistent with the 3 gamma and 6 k terms; the
// expressions below are verified against the full stationary residual.)
//
// Branch pinning: continuation in gamma holds the modulus |b_c| = B fixed.
// The branch then connects to the circular family at its bifurcation point
// (where Im b = 0) and terminates at the gamma where the amplitudes shrink
// to zero onto the broken-phase linear eigenvector.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ptquad/core.hpp"
#include "ptquad/linalg.hpp"

namespace ptquad {

struct GhostMode {
    double c1 = 0.0;     // modulus of w1 (= modulus of w3), gain sites
    double c2 = 0.0;     // modulus of w2 (= modulus of w4), lossy sites
    double phi1 = 0.0;   // gauge-fixed to 0 by the solver
    double phi2 = 0.0;
    double B = 0.0;      // modulus of the propagation constant
    double phi_b = 0.0;  // argument of the propagation constant
    CouplerParams params;

    Complex b() const { return std::polar(B, phi_b); }

    FieldState field() const {
        const Complex i(0.0, 1.0);
        const Complex w1 = std::polar(c1, phi1);
        const Complex w2 = std::polar(c2, phi2);
        return {w1, w2, i * w1, i * w2};
    }
};

namespace detail {

struct GhostExprs {
    double sin_phib;  // (c2^2 - c1^2) gamma / ((c1^2 + c2^2) B)
    double cos_phib;  // (5 - alpha)(c1^2 + c2^2) / (3 B)
    double sin_a, sin_b;  // the two expressions for sin(phi2 - phi1)
    double cos_a, cos_b;  // the two expressions for cos(phi2 - phi1)
};

inline GhostExprs ghost_exprs(const CouplerParams& p, double c1, double c2, double B,
                              double phi_b) {
    const double g = p.gamma, k = p.k;
    const double na = 5.0 - p.alpha;
    const double s = std::sin(phi_b), c = std::cos(phi_b);
    GhostExprs e;
    const double S = c1 * c1 + c2 * c2;
    e.sin_phib = (c2 * c2 - c1 * c1) * g / (S * B);
    e.cos_phib = na * S / (3.0 * B);
    e.sin_a = (3.0 * g - 3.0 * B * (s + c) + na * c2 * c2) * c2 / (6.0 * k * c1);
    e.sin_b = (3.0 * g + 3.0 * B * (s - c) + na * c1 * c1) * c1 / (6.0 * k * c2);
    e.cos_a = (3.0 * g - 3.0 * B * (s - c) - na * c2 * c2) * c2 / (6.0 * k * c1);
    e.cos_b = (3.0 * g + 3.0 * B * (s + c) - na * c1 * c1) * c1 / (6.0 * k * c2);
    return e;
}

}  // namespace detail

// The four consistency defects of the reduced ghost algebra:
//  (0) sin^2 + cos^2 - 1 with sin phi_b, cos phi_b replaced by their
//      algebraic expressions,
//  (1) difference of the two expressions for sin(phi2 - phi1),
//  (2) difference of the two expressions for cos(phi2 - phi1),
//  (3) sin^2 + cos^2 - 1 built from one expression of each.
// All four vanish at a true ghost.
inline std::array<double, 4> ghost_residual(const GhostMode& g) {
    g.params.validate();
    if (!(g.c1 * g.c1 + g.c2 * g.c2 > 0.0) || !(g.B > 0.0))
        throw std::invalid_argument("ghost_residual: zero amplitudes or zero |b|");
    const auto e = detail::ghost_exprs(g.params, g.c1, g.c2, g.B, g.phi_b);
    return {e.sin_phib * e.sin_phib + e.cos_phib * e.cos_phib - 1.0,
            e.sin_a - e.sin_b,
            e.cos_a - e.cos_b,
            e.sin_a * e.sin_a + e.cos_a * e.cos_a - 1.0};
}

namespace detail {

// Square system for Newton: unknowns x = (c1, c2, psi, B, phi_b) with
// psi = phi2 - phi1; equations are the four sin/cos consistency relations
// plus the modulus pinning B = b_target.
inline std::array<double, kMaxRealDim> ghost_system(const CouplerParams& p,
                                                    const std::array<double, 5>& x,
                                                    double b_target) {
    const auto e = ghost_exprs(p, x[0], x[1], x[3], x[4]);
    std::array<double, kMaxRealDim> f{};
    f[0] = std::sin(x[2]) - e.sin_a;
    f[1] = std::sin(x[2]) - e.sin_b;
    f[2] = std::cos(x[2]) - e.cos_a;
    f[3] = std::cos(x[2]) - e.cos_b;
    f[4] = x[3] - b_target;
    return f;
}

}  // namespace detail

// Closed-form member of the asymmetric ghost family at modulus pinning
// |b| = b_target. Writing m = (c2/c1)^2 and p = nu c1^2, the family solves
//   (I)  p^2 (1+m)^2 + gamma^2 (m-1)^2/(m+1)^2 = b_target^2
//   (II) m p^2 + 4 gamma^2 m/(1+m)^2          = 2 k^2,
// solved here by bisection in m on the asymmetric side selected by
// `growing` (c1 > c2 gives Im b < 0, the growing ghost). Returns nullopt
// below the bifurcation gamma or past the terminal gamma.
inline std::optional<GhostMode> ghost_closed_form(const CouplerParams& p, double b_target,
                                                  bool growing = true) {
    p.validate();
    if (!(b_target > 0.0)) throw std::invalid_argument("ghost_closed_form: b_target must be > 0");
    const double g = p.gamma, k = p.k;
    const double nu = (5.0 - p.alpha) / 3.0;

    // Onset: the symmetric limit m = 1 requires p = b/2 and p^2 + g^2 = 2k^2.
    const double onset2 = 2.0 * k * k - 0.25 * b_target * b_target;
    if (onset2 < 0.0 || g * g < onset2) return std::nullopt;

    auto p2_of_m = [&](double m) {
        return (2.0 * k * k - 4.0 * g * g * m / ((1.0 + m) * (1.0 + m))) / m;
    };
    auto defect = [&](double m) {
        const double p2 = p2_of_m(m);
        if (p2 < 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double d = (m - 1.0) / (m + 1.0);
        return p2 * (1.0 + m) * (1.0 + m) + g * g * d * d - b_target * b_target;
    };

    // Bracket on m in (0, 1), scanning downward. The window where p^2 < 0
    // (no real amplitude) is skipped; for gamma > k it separates m = 1 from
    // the root, so the scan must pass through it rather than stop.
    double lo = 0.0, hi = 0.0, f_lo = 0.0;
    bool bracketed = false;
    double prev_m = std::numeric_limits<double>::quiet_NaN();
    double prev_f = std::numeric_limits<double>::quiet_NaN();
    for (double m = 1.0 - 1e-14; m > 1e-12; m *= 0.97) {
        const double fm = defect(m);
        if (std::isfinite(fm) && std::isfinite(prev_f) && fm * prev_f < 0.0) {
            lo = m;
            f_lo = fm;
            hi = prev_m;
            bracketed = true;
            break;
        }
        prev_m = m;
        prev_f = fm;
    }
    if (!bracketed) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = defect(mid);
        if (!std::isfinite(fm)) break;
        if (fm * f_lo <= 0.0) hi = mid;
        else { lo = mid; f_lo = fm; }
    }
    double m = 0.5 * (lo + hi);
    if (!growing) m = 1.0 / m;  // mirror branch c1 <-> c2

    const double p2 = p2_of_m(m);
    if (p2 <= 0.0) return std::nullopt;
    const double pp = std::sqrt(p2);
    const double c1 = std::sqrt(pp / nu);
    const double c2 = std::sqrt(m) * c1;
    const double r = std::sqrt(m);

    const double X = pp * r / k;
    const double Y = 2.0 * g * r / (k * (1.0 + m));
    const double psi = std::atan2(0.5 * (Y - X), 0.5 * (X + Y));

    const double re_b = pp * (1.0 + m);
    const double im_b = g * (m - 1.0) / (m + 1.0);

    GhostMode out;
    out.c1 = c1;
    out.c2 = c2;
    out.phi1 = 0.0;
    out.phi2 = psi;
    out.B = std::hypot(re_b, im_b);
    out.phi_b = std::atan2(im_b, re_b);
    out.params = p;
    return out;
}

// Terminal gamma of the modulus-pinned ghost branch: the amplitudes reach
// zero (p -> 0) at m = [(k^2+B^2) - sqrt((k^2+B^2)^2 - k^4)]/k^2,
// gamma_end = B (1+m)/(1-m); b_target = 2, k = 1 gives sqrt(6).
inline double ghost_gamma_end(const CouplerParams& p, double b_target) {
    const double k2 = p.k * p.k, B2 = b_target * b_target;
    const double m = (k2 + B2 - std::sqrt((k2 + B2) * (k2 + B2) - k2 * k2)) / k2;
    return b_target * (1.0 + m) / (1.0 - m);
}

inline double ghost_gamma_onset(const CouplerParams& p, double b_target) {
    const double v = 2.0 * p.k * p.k - 0.25 * b_target * b_target;
    if (v < 0.0) return 0.0;
    return std::sqrt(v);
}

// Newton solution of the reduced ghost system with |b| pinned to b_target,
// gauge phi1 = 0, verified against the full complex-b stationary residual;
// a root of the reduced algebra that fails the full system is reported as
// a spurious root.
inline GhostMode ghost_solve(const CouplerParams& p, double b_target, const GhostMode& seed,
                             double tol = 1e-12, int max_iter = 80) {
    p.validate();
    std::array<double, 5> x{seed.c1, seed.c2, seed.phi2 - seed.phi1, seed.B, seed.phi_b};
    if (x[3] <= 0.0) x[3] = b_target;

    auto norm_inf = [](const std::array<double, kMaxRealDim>& v) {
        double n = 0.0;
        for (int j = 0; j < 5; ++j) n = std::max(n, std::abs(v[j]));
        return n;
    };

    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        auto f = detail::ghost_system(p, x, b_target);
        if (norm_inf(f) < tol) { converged = true; break; }

        RMat J(5);
        for (int j = 0; j < 5; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            auto xp = x; xp[j] += h;
            auto xm = x; xm[j] -= h;
            const auto fp = detail::ghost_system(p, xp, b_target);
            const auto fm = detail::ghost_system(p, xm, b_target);
            for (int r = 0; r < 5; ++r) J(r, j) = (fp[r] - fm[r]) / (2.0 * h);
        }
        std::array<double, kMaxRealDim> rhs{};
        for (int j = 0; j < 5; ++j) rhs[j] = -f[j];
        if (lu_solve(J, rhs) < 1e-14)
            throw std::runtime_error("ghost_solve: singular Jacobian");
        double lambda = 1.0;
        const double f0 = norm_inf(f);
        for (int hstep = 0; hstep < 25; ++hstep) {
            auto xt = x;
            for (int j = 0; j < 5; ++j) xt[j] += lambda * rhs[j];
            if (norm_inf(detail::ghost_system(p, xt, b_target)) <= (1.0 - 0.5 * lambda) * f0 + 1e-15) {
                x = xt;
                break;
            }
            lambda *= 0.5;
            if (hstep == 24) x = xt;
        }
    }
    if (!converged) {
        const auto f = detail::ghost_system(p, x, b_target);
        if (norm_inf(f) >= tol) throw std::runtime_error("ghost_solve: no convergence");
    }

    // Normalize representation: positive moduli, sign flips folded into the
    // relative phase by a global gauge rotation.
    if (x[0] < 0.0) { x[0] = -x[0]; x[2] -= M_PI; }
    if (x[1] < 0.0) { x[1] = -x[1]; x[2] += M_PI; }

    GhostMode out;
    out.c1 = x[0];
    out.c2 = x[1];
    out.phi1 = 0.0;
    out.phi2 = std::remainder(x[2], 2.0 * M_PI);
    out.B = x[3];
    out.phi_b = std::remainder(x[4], 2.0 * M_PI);
    out.params = p;

    const FieldState res = stationary_residual(p, out.b(), out.field());
    if (max_abs(res) > 1e-10)
        throw std::runtime_error("ghost_solve: spurious root (reduced algebra only)");
    return out;
}

struct GhostBranchPoint {
    double gamma;
    GhostMode mode;
};

struct GhostBranchCurve {
    std::vector<GhostBranchPoint> points;
    std::string termination;  // "existence-lost" (amplitudes -> 0) or "boundary"
    double gamma_last = 0.0;
};

// Continuation of the modulus-pinned ghost branch over gamma. The first
// point sits a small offset past the bifurcation (the Jacobian is
// degenerate exactly at the onset); each subsequent point is Newton-refined
// from its predecessor and cross-checked against the closed form.
inline GhostBranchCurve ghost_branch(const CouplerParams& base, double b_target,
                                     std::pair<double, double> gamma_range, bool growing = true,
                                     double dgamma = 0.02) {
    base.validate();
    GhostBranchCurve curve;
    const double onset = ghost_gamma_onset(base, b_target);
    double g = std::max(gamma_range.first, onset + 1e-2);

    CouplerParams p = base;
    p.gamma = g;
    auto seed = ghost_closed_form(p, b_target, growing);
    if (!seed) throw std::runtime_error("ghost_branch: no ghost at the starting gamma");
    GhostMode cur = ghost_solve(p, b_target, *seed);
    curve.points.push_back({g, cur});

    double step = dgamma;
    while (g < gamma_range.second) {
        if (step < 1e-7) break;
        const double gn = std::min(g + step, gamma_range.second);
        CouplerParams pn = base;
        pn.gamma = gn;
        try {
            GhostMode next = ghost_solve(pn, b_target, cur);
            if (!(next.c1 > 1e-8 && next.c2 > 1e-8)) throw std::runtime_error("amplitude collapse");
            cur = next;
            g = gn;
            curve.points.push_back({g, cur});
            step = std::min(step * 1.3, dgamma);
        } catch (const std::runtime_error&) {
            step *= 0.5;
        }
    }
    curve.gamma_last = g;
    curve.termination = (g >= gamma_range.second - 1e-9) ? "boundary" : "existence-lost";
    return curve;
}

}  // namespace ptquad
