#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ptquad/core.hpp"
#include "ptquad/exact_modes.hpp"
#include "ptquad/rng.hpp"

using namespace ptquad;
using Catch::Approx;

namespace {

FieldState random_state(std::mt19937_64& rng, double scale = 1.0) {
    FieldState u;
    for (int j = 0; j < 4; ++j) u[j] = scale * gaussian_complex(rng);
    return u;
}

}  // namespace

TEST_CASE("parameter invariants") {
    CouplerParams p;
    p.k = 1.0;
    REQUIRE_NOTHROW(p.validate());
    p.k = 0.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.k = 1.0;
    p.gamma = -0.1;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.gamma = 0.5;
    p.alpha = 2;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = 1;
    p.delta1 = 0.3;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.delta1 = 0.0;
    REQUIRE_NOTHROW(p.validate());
}

TEST_CASE("rhs_dynamic hand-evaluated example") {
    CouplerParams p{1.0, 0.5, 0};
    const FieldState u{Complex(1, 0), 0.0, 0.0, 0.0};
    const FieldState du = rhs_dynamic(p, 0.0, u);
    CHECK(std::abs(du[0] - Complex(0.5, 1.0)) < 1e-15);
    CHECK(std::abs(du[1] - Complex(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(du[2]) < 1e-15);
    CHECK(std::abs(du[3] - Complex(0.0, 1.0)) < 1e-15);
}

TEST_CASE("rhs_dynamic zero state and rejection of non-finite input") {
    CouplerParams p{1.0, 0.0, 0};
    const FieldState zero{};
    const FieldState du = rhs_dynamic(p, 0.0, zero);
    CHECK(max_abs(du) == 0.0);

    FieldState bad{};
    bad[2] = Complex(std::numeric_limits<double>::infinity(), 0.0);
    REQUIRE_THROWS_AS(rhs_dynamic(p, 0.0, bad), std::invalid_argument);
}

TEST_CASE("U(1) equivariance of the dynamical right-hand side") {
    std::mt19937_64 rng(11);
    for (int alpha : {0, 1}) {
        CouplerParams p{1.3, 0.4, alpha};
        for (int trial = 0; trial < 40; ++trial) {
            const FieldState u = random_state(rng);
            const double theta = 2.0 * M_PI * (rng() >> 11) * 0x1.0p-53;
            const Complex ph = std::polar(1.0, theta);
            FieldState up;
            for (int j = 0; j < 4; ++j) up[j] = ph * u[j];
            const FieldState a = rhs_dynamic(p, 0.7, up);
            const FieldState b = rhs_dynamic(p, 0.7, u);
            for (int j = 0; j < 4; ++j) CHECK(std::abs(a[j] - ph * b[j]) < 1e-12);
        }
    }
    // Equivariance also holds with the explicit four-wave override at alpha=0.
    CouplerParams p{1.0, 0.2, 0, 0.7, 1.1};
    const FieldState u = random_state(rng);
    const Complex ph = std::polar(1.0, 1.234);
    FieldState up;
    for (int j = 0; j < 4; ++j) up[j] = ph * u[j];
    const FieldState a = rhs_dynamic(p, 0.3, up, true);
    const FieldState b = rhs_dynamic(p, 0.3, u, true);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(a[j] - ph * b[j]) < 1e-12);
}

TEST_CASE("power imbalance is the exact dU/dz for every alpha and mismatch") {
    std::mt19937_64 rng(12);
    struct Cfg { int alpha; bool override_fw; double d1, d2; };
    for (const Cfg cfg : {Cfg{0, false, 0, 0}, Cfg{1, false, 0, 0}, Cfg{0, true, 0.7, 1.3}}) {
        CouplerParams p{1.1, 0.6, cfg.alpha, cfg.d1, cfg.d2};
        for (int trial = 0; trial < 30; ++trial) {
            const FieldState u = random_state(rng);
            const FieldState du = rhs_dynamic(p, 0.37, u, cfg.override_fw);
            double dU = 0.0;
            for (int j = 0; j < 4; ++j) dU += 2.0 * (std::conj(u[j]) * du[j]).real();
            CHECK(dU == Approx(power_imbalance(p, u)).margin(1e-12));
        }
    }
}

TEST_CASE("power imbalance examples") {
    CouplerParams p{1.0, 0.5, 0};
    CHECK(power_imbalance(p, {Complex(1, 0), 0, 0, 0}) == Approx(1.0));
    p.gamma = 0.0;
    std::mt19937_64 rng(5);
    CHECK(power_imbalance(p, random_state(rng)) == 0.0);
    p.gamma = 0.8;
    const FieldState balanced{Complex(0.3, 0.1), Complex(-0.1, 0.3), Complex(0.5, 0),
                              Complex(0, 0.5)};
    CHECK(power_imbalance(p, balanced) == Approx(0.0).margin(1e-15));
}

TEST_CASE("pt_apply definition and involution") {
    const FieldState u{Complex(1, 0), Complex(0, 2), Complex(3, 0), Complex(4, 0)};
    const FieldState v = pt_apply(u);
    CHECK(v[0] == Complex(4, 0));
    CHECK(v[1] == Complex(3, 0));
    CHECK(v[2] == Complex(0, -2));
    CHECK(v[3] == Complex(1, 0));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const FieldState w = random_state(rng);
        const FieldState ww = pt_apply(pt_apply(w));
        for (int j = 0; j < 4; ++j) CHECK(std::abs(ww[j] - w[j]) < 1e-15);
    }
}

TEST_CASE("power basics") {
    CHECK(power({Complex(1, 0), Complex(1, 0), Complex(1, 0), Complex(1, 0)}) == 4.0);
    CHECK(power(FieldState{}) == 0.0);
}

TEST_CASE("stationary residual: zero solution and gauge invariance") {
    CouplerParams p{1.0, 0.7, 0};
    CHECK(max_abs(stationary_residual(p, 1.3, FieldState{})) == 0.0);

    ExactModeSpec spec{+1, 2.0, {1.0, 0.5, 0}};
    const StationaryMode m = circular_mode(spec);
    REQUIRE(residual_norm(m) < 1e-12);
    for (double theta : {0.3, 1.7, -2.2}) {
        const Complex ph = std::polar(1.0, theta);
        FieldState w;
        for (int j = 0; j < 4; ++j) w[j] = ph * m.w[j];
        CHECK(max_abs(stationary_residual(m.params, m.b, w)) < 1e-12);
    }
}

TEST_CASE("PT covariance of the stationary residual") {
    // R(b, PT w) = PT(R(b, w)) exactly, for real b; the stationary solution
    // set is PT-invariant as a consequence.
    std::mt19937_64 rng(9);
    for (int alpha : {0, 1}) {
        CouplerParams p{0.9, 0.35, alpha};
        for (int trial = 0; trial < 30; ++trial) {
            const FieldState w = random_state(rng);
            const double b = 1.7;
            const FieldState lhs = stationary_residual(p, b, pt_apply(w));
            const FieldState rhs = pt_apply(stationary_residual(p, b, w));
            for (int j = 0; j < 4; ++j) CHECK(std::abs(lhs[j] - rhs[j]) < 1e-13);
        }
    }
}

TEST_CASE("jacobian blocks match directional finite differences") {
    std::mt19937_64 rng(21);
    for (int alpha : {0, 1}) {
        CouplerParams p{1.0, 0.5, alpha};
        const double b = 1.9;
        const FieldState w = random_state(rng);
        const auto blocks = stationary_jacobian_blocks(p, b, w);
        for (int trial = 0; trial < 8; ++trial) {
            FieldState d = random_state(rng);
            double n = std::sqrt(power(d));
            for (auto& v : d) v /= n;
            const double h = 1e-6;
            FieldState wp = w, wm = w;
            for (int j = 0; j < 4; ++j) { wp[j] += h * d[j]; wm[j] -= h * d[j]; }
            const FieldState rp = stationary_residual(p, b, wp);
            const FieldState rm = stationary_residual(p, b, wm);
            for (int i = 0; i < 4; ++i) {
                Complex lin(0.0);
                for (int j = 0; j < 4; ++j)
                    lin += blocks.A(i, j) * d[j] + blocks.B(i, j) * std::conj(d[j]);
                const Complex fd = (rp[i] - rm[i]) / (2.0 * h);
                CHECK(std::abs(fd - lin) < 1e-6);
            }
        }
    }
}
