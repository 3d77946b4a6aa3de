#include <catch2/catch_amalgamated.hpp>

#include "ptquad/exact_modes.hpp"
#include "ptquad/newton.hpp"
#include "ptquad/perturbation.hpp"
#include "ptquad/rng.hpp"

using namespace ptquad;
using Catch::Approx;

TEST_CASE("newton returns to a perturbed exact mode") {
    ExactModeSpec spec{+1, 2.0, {1.0, 0.5, 0}};
    const StationaryMode exact = circular_mode(spec);
    const FieldState r = random_unit_state(404);
    FieldState seed = exact.w;
    for (int j = 0; j < 4; ++j) seed[j] += 1e-3 * r[j];

    const StationaryMode m = newton_solve(exact.params, 2.0, seed);
    CHECK(residual_norm(m) < 1e-12);
    CHECK(gauge_distance(m.w, exact.w) < 1e-10);
}

TEST_CASE("newton rejects zero and non-finite seeds") {
    CouplerParams p{1.0, 0.5, 0};
    REQUIRE_THROWS_AS(newton_solve(p, 2.0, FieldState{}), std::invalid_argument);
    FieldState bad{};
    bad[0] = Complex(std::nan(""), 0.0);
    REQUIRE_THROWS_AS(newton_solve(p, 2.0, bad), std::invalid_argument);
}

TEST_CASE("perturbative seeding reaches the elliptic family") {
    CouplerParams p{1.0, 0.5, 0};
    const double bt = btilde(p, +1);
    const auto root = elliptic_root(p, bt);
    REQUIRE(root.has_value());
    const auto wt = pt_eigenvector(p, bt, root->theta).v;
    const double eps = 0.3;
    FieldState seed;
    for (int j = 0; j < 4; ++j) seed[j] = eps * wt[j];
    const double b = bt + eps * eps * root->B2;

    const StationaryMode m = newton_solve(p, b, seed);
    CHECK(residual_norm(m) < 1e-12);
    // elliptic: unequal amplitudes with the PT pattern (a, c, c, a)
    const double a1 = std::abs(m.w[0]), a2 = std::abs(m.w[1]);
    CHECK(std::abs(a1 - a2) > 0.05);
    CHECK(std::abs(m.w[3]) == Approx(a1).margin(1e-10));
    CHECK(std::abs(m.w[2]) == Approx(a2).margin(1e-10));
}

TEST_CASE("gauge independence of newton results") {
    ExactModeSpec spec{-1, 2.0, {1.0, 0.8, 0}};
    const StationaryMode exact = circular_mode(spec);
    const StationaryMode ref = newton_solve(exact.params, 2.0, exact.w);
    for (double theta : {0.4, 1.9, 3.7}) {
        FieldState seed;
        const Complex ph = std::polar(1.0, theta);
        for (int j = 0; j < 4; ++j) seed[j] = ph * exact.w[j];
        const StationaryMode m = newton_solve(exact.params, 2.0, seed);
        CHECK(gauge_distance(m.w, ref.w) < 1e-10);
    }
}

TEST_CASE("gauge alignment helper") {
    const FieldState a{Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
    FieldState b;
    const Complex ph = std::polar(1.0, 0.77);
    for (int j = 0; j < 4; ++j) b[j] = ph * a[j];
    CHECK(gauge_distance(b, a) < 1e-15);
    const FieldState ba = gauge_align(b, a);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(ba[j] - a[j]) < 1e-15);
}
