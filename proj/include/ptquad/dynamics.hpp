// z-propagation of the dynamical system with an embedded Dormand-Prince
// 5(4) pair, uniform trace sampling, controlled perturbations of stationary
// modes, and the log-intensity overlay fit used to compare unstable
// evolutions with ghost-state exponentials.
//
// Gain-driven blowup is data, not failure: when the state norm exceeds the
// overflow bound the trace is truncated and tagged, and everything sampled
// so far stays valid.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ptquad/core.hpp"
#include "ptquad/ghosts.hpp"
#include "ptquad/rng.hpp"

namespace ptquad {

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double sample_dz = 0.1;          // 10 samples per unit z
    double overflow_norm = 1e12;     // truncate when ||u|| exceeds this
    long long max_steps = 200000000; // hard budget; exceeded -> error
    bool four_wave_override = false;
};

struct EvolutionTrace {
    enum class Status { Completed, Blowup };

    std::vector<double> z;
    std::vector<FieldState> states;
    std::vector<std::array<double, 4>> intensities;
    std::vector<double> U;
    Status status = Status::Completed;
    double blowup_z = 0.0;  // meaningful only when status == Blowup

    CouplerParams params;
    FieldState initial{};
    IntegratorOptions options;

    size_t size() const { return z.size(); }
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // 4th-order embedded weights.
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

inline FieldState axpy(const FieldState& y, double h, const FieldState& k) {
    FieldState r;
    for (int j = 0; j < 4; ++j) r[j] = y[j] + h * k[j];
    return r;
}

}  // namespace detail

// Integrates the dynamical system from u0 to z_max, sampling on a uniform
// grid of spacing ~opts.sample_dz (adjusted so the grid lands exactly on
// z_max). Steps are clamped to the sample points, so the recorded states
// are genuine solution values, not interpolants.
inline EvolutionTrace integrate(const CouplerParams& p, const FieldState& u0, double z_max,
                                const IntegratorOptions& opts = {}) {
    p.validate();
    if (!finite(u0)) throw std::invalid_argument("integrate: non-finite initial state");
    if (!(z_max > 0.0)) throw std::invalid_argument("integrate: z_max must be positive");
    if (opts.rel_tol < 1e-13 || opts.rel_tol > 1e-3 || opts.abs_tol < 1e-13 || opts.abs_tol > 1e-3)
        throw std::invalid_argument("integrate: tolerances must lie in [1e-13, 1e-3]");

    using D = detail::Dopri5;
    const bool fw = (p.alpha == 1) || opts.four_wave_override;
    auto f = [&p, fw](double z, const FieldState& u) { return detail::rhs_unchecked(p, z, u, fw); };

    EvolutionTrace tr;
    tr.params = p;
    tr.initial = u0;
    tr.options = opts;

    const int n_samples = std::max(1, static_cast<int>(std::ceil(z_max / opts.sample_dz)));
    const double dz = z_max / n_samples;

    auto record = [&tr](double z, const FieldState& u) {
        tr.z.push_back(z);
        tr.states.push_back(u);
        std::array<double, 4> in{};
        for (int j = 0; j < 4; ++j) in[j] = std::norm(u[j]);
        tr.intensities.push_back(in);
        tr.U.push_back(in[0] + in[1] + in[2] + in[3]);
    };

    FieldState u = u0;
    double z = 0.0;
    record(z, u);
    FieldState k1 = f(z, u);
    double h = std::min(dz, 1e-2);
    long long n_steps = 0;

    for (int s = 1; s <= n_samples; ++s) {
        const double z_target = s * dz;
        while (z < z_target) {
            h = std::min(h, z_target - z);
            const FieldState k2 = f(z + D::c2 * h, detail::axpy(u, h * D::a21, k1));
            FieldState y = u;
            for (int j = 0; j < 4; ++j) y[j] += h * (D::a31 * k1[j] + D::a32 * k2[j]);
            const FieldState k3 = f(z + D::c3 * h, y);
            y = u;
            for (int j = 0; j < 4; ++j)
                y[j] += h * (D::a41 * k1[j] + D::a42 * k2[j] + D::a43 * k3[j]);
            const FieldState k4 = f(z + D::c4 * h, y);
            y = u;
            for (int j = 0; j < 4; ++j)
                y[j] += h * (D::a51 * k1[j] + D::a52 * k2[j] + D::a53 * k3[j] + D::a54 * k4[j]);
            const FieldState k5 = f(z + D::c5 * h, y);
            y = u;
            for (int j = 0; j < 4; ++j)
                y[j] += h * (D::a61 * k1[j] + D::a62 * k2[j] + D::a63 * k3[j] + D::a64 * k4[j] +
                             D::a65 * k5[j]);
            const FieldState k6 = f(z + h, y);
            FieldState u5 = u;
            for (int j = 0; j < 4; ++j)
                u5[j] += h * (D::b1 * k1[j] + D::b3 * k3[j] + D::b4 * k4[j] + D::b5 * k5[j] +
                              D::b6 * k6[j]);
            const FieldState k7 = f(z + h, u5);

            double err = 0.0;
            for (int j = 0; j < 4; ++j) {
                const Complex e = h * ((D::b1 - D::e1) * k1[j] + (D::b3 - D::e3) * k3[j] +
                                       (D::b4 - D::e4) * k4[j] + (D::b5 - D::e5) * k5[j] +
                                       (D::b6 - D::e6) * k6[j] - D::e7 * k7[j]);
                const double scale =
                    opts.abs_tol + opts.rel_tol * std::max(std::abs(u[j]), std::abs(u5[j]));
                err = std::max(err, std::abs(e) / scale);
            }

            if (err <= 1.0) {
                z += h;
                u = u5;
                k1 = k7;  // FSAL
                if (std::sqrt(power(u)) > opts.overflow_norm) {
                    record(z, u);
                    tr.status = EvolutionTrace::Status::Blowup;
                    tr.blowup_z = z;
                    return tr;
                }
            }
            const double factor =
                (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= factor;
            if (h <= 2e-14 * std::max(1.0, z))
                throw std::runtime_error("integrate: step size underflow");
            if (++n_steps > opts.max_steps)
                throw std::runtime_error("integrate: step budget exhausted");
        }
        record(z_target, u);
    }
    return tr;
}

// Stationary mode plus a deterministic random perturbation of norm eps.
inline FieldState perturb(const StationaryMode& mode, double eps, unsigned long long rng_seed) {
    if (eps < 0.0) throw std::invalid_argument("perturb: eps must be >= 0");
    if (eps == 0.0) return mode.w;
    const FieldState r = random_unit_state(rng_seed);
    FieldState out = mode.w;
    for (int j = 0; j < 4; ++j) out[j] += eps * r[j];
    return out;
}

// Predicted intensity trace of a ghost state under its own ansatz
// u_j = w_j e^{i b_c z}: the intensities evolve as |w_j|^2 e^{-2 Im(b) z}.
inline EvolutionTrace ghost_trace(const GhostMode& g, double z_max, double sample_dz = 0.1) {
    EvolutionTrace tr;
    tr.params = g.params;
    tr.initial = g.field();
    const int n = std::max(1, static_cast<int>(std::ceil(z_max / sample_dz)));
    const double dz = z_max / n;
    const double rate = -2.0 * g.b().imag();
    const std::array<double, 4> base = {g.c1 * g.c1, g.c2 * g.c2, g.c1 * g.c1, g.c2 * g.c2};
    for (int s = 0; s <= n; ++s) {
        const double z = s * dz;
        const double e = std::exp(rate * z);
        tr.z.push_back(z);
        std::array<double, 4> in{};
        for (int j = 0; j < 4; ++j) in[j] = base[j] * e;
        tr.intensities.push_back(in);
        tr.U.push_back(in[0] + in[1] + in[2] + in[3]);
        FieldState st = g.field();
        const Complex ph = std::exp(Complex(0.0, 1.0) * g.b() * z);
        for (int j = 0; j < 4; ++j) st[j] *= ph;
        tr.states.push_back(st);
    }
    return tr;
}

struct ShiftFit {
    double shift;
    double misfit;  // RMS of log-U differences per sample on the window
};

namespace detail {

// Linear interpolation of log U on a trace; exact for exponential traces.
inline double log_u_at(const EvolutionTrace& t, double z) {
    const auto& zs = t.z;
    auto it = std::upper_bound(zs.begin(), zs.end(), z);
    size_t i1 = std::clamp<size_t>(it - zs.begin(), 1, zs.size() - 1);
    const size_t i0 = i1 - 1;
    const double t01 = (z - zs[i0]) / (zs[i1] - zs[i0]);
    return (1.0 - t01) * std::log(t.U[i0]) + t01 * std::log(t.U[i1]);
}

}  // namespace detail

// Scalar shift s minimizing the mean squared difference of log total
// intensities, log U_a(z) vs log U_b(z - s), over samples of trace a inside
// the window; golden-section search on the feasible shift interval.
inline ShiftFit overlay_shift_fit(const EvolutionTrace& a, const EvolutionTrace& b,
                                  std::pair<double, double> window) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("overlay_shift_fit: empty trace");
    const double wlo = window.first, whi = window.second;
    if (!(wlo < whi) || wlo < a.z.front() - 1e-12 || whi > a.z.back() + 1e-12)
        throw std::invalid_argument("overlay_shift_fit: window exceeds trace support");
    for (size_t i = 0; i < a.size(); ++i)
        if (a.U[i] <= 0.0) throw std::invalid_argument("overlay_shift_fit: nonpositive intensity");

    // Feasible shifts keep z - s inside trace b for the whole window.
    const double s_min = whi - b.z.back();
    const double s_max = wlo - b.z.front();
    if (!(s_min < s_max))
        throw std::invalid_argument("overlay_shift_fit: window exceeds trace support");

    std::vector<size_t> idx;
    for (size_t i = 0; i < a.size(); ++i)
        if (a.z[i] >= wlo - 1e-12 && a.z[i] <= whi + 1e-12) idx.push_back(i);
    if (idx.size() < 2) throw std::invalid_argument("overlay_shift_fit: window has too few samples");

    auto cost = [&](double s) {
        double acc = 0.0;
        for (size_t i : idx) {
            const double d = std::log(a.U[i]) - detail::log_u_at(b, a.z[i] - s);
            acc += d * d;
        }
        return acc / idx.size();
    };

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = s_min, hi = s_max;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        if (f1 <= f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = cost(x2);
        }
    }
    const double s = 0.5 * (lo + hi);
    return {s, std::sqrt(cost(s))};
}

// Max defect of the power-balance law dU/dz = 2 gamma (I1 + I3 - I2 - I4)
// over interior samples, with dU/dz from a 7-point (6th order) stencil on
// the uniform trace grid; normalized by max(1, U).
inline double power_law_defect(const EvolutionTrace& t) {
    if (t.size() < 8) throw std::invalid_argument("power_law_defect: trace too short");
    const double h = t.z[1] - t.z[0];
    static constexpr double c[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    double worst = 0.0;
    for (size_t i = 3; i + 3 < t.size(); ++i) {
        double du = 0.0;
        for (int m = 1; m <= 3; ++m) du += c[m - 1] * (t.U[i + m] - t.U[i - m]);
        du /= h;
        const double target = power_imbalance(t.params, t.states[i]);
        worst = std::max(worst, std::abs(du - target) / std::max(1.0, t.U[i]));
    }
    return worst;
}

}  // namespace ptquad
