#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ptquad/core.hpp"
#include "ptquad/linalg.hpp"
#include "ptquad/spectrum.hpp"

using namespace ptquad;
using Catch::Approx;

namespace {

// Numerical rank of a 4x4 complex matrix by row elimination with full
// column pivoting; enough for the semisimplicity check.
int rank4(CMat m, double tol) {
    const int n = m.dim();
    int rank = 0;
    for (int col = 0, row = 0; col < n && row < n; ++col) {
        int piv = row;
        for (int r = row + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (std::abs(m(piv, col)) < tol) continue;
        if (piv != row)
            for (int j = 0; j < n; ++j) std::swap(m(row, j), m(piv, j));
        for (int r = row + 1; r < n; ++r) {
            const Complex f = m(r, col) / m(row, col);
            for (int j = col; j < n; ++j) m(r, j) -= f * m(row, j);
        }
        ++row;
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("build_H at gamma = 0 reduces to the real symmetric coupling matrix") {
    const CMat h = build_H({1.0, 0.0, 0});
    const double expected[4][4] = {
        {0, 1, 0, 1}, {1, 0, -1, 0}, {0, -1, 0, 1}, {1, 0, 1, 0}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(h(i, j).real() == Approx(expected[i][j]).margin(0.0));
            CHECK(h(i, j).imag() == 0.0);
        }
}

TEST_CASE("H is complex symmetric and PT symmetric") {
    for (double g : {0.0, 0.5, 1.2, 2.0}) {
        const CMat h = build_H({1.3, g, 0});
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                CHECK(h(i, j) == h(j, i));  // H^T = H, exact
                // P conj(H) P = H with P the anti-diagonal flip.
                CHECK(h(i, j) == std::conj(h(3 - i, 3 - j)));
            }
    }
}

TEST_CASE("closed-form eigenvalues across the PT transition") {
    const auto s0 = eigenvalues_closed({1.0, 0.0, 0});
    CHECK(s0.b_plus.real() == Approx(1.4142135623730951).epsilon(1e-12));
    CHECK_FALSE(s0.broken);

    const auto s1 = eigenvalues_closed({1.0, 0.5, 0});
    CHECK(s1.b_plus.real() == Approx(1.3228756555322954).epsilon(1e-12));
    CHECK(s1.b_minus.real() == Approx(-1.3228756555322954).epsilon(1e-12));
    CHECK(s1.b_plus.imag() == 0.0);
    CHECK_FALSE(s1.broken);
    CHECK(s1.gamma_cr1 == Approx(std::sqrt(2.0)));

    const auto s2 = eigenvalues_closed({1.0, 1.5, 0});
    CHECK(s2.broken);
    CHECK(s2.b_plus.real() == 0.0);
    CHECK(s2.b_plus.imag() == Approx(0.5).epsilon(1e-12));
    CHECK(s2.b_minus.imag() == Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("numeric spectrum matches closed form with double multiplicity") {
    for (double g : {0.0, 0.3, 0.9, 1.2, 1.39}) {
        CouplerParams p{1.0, g, 0};
        const auto closed = eigenvalues_closed(p);
        auto eig = eigen_numeric(build_H(p));
        int near_plus = 0, near_minus = 0;
        for (const auto& l : eig) {
            if (std::abs(l - closed.b_plus) < 1e-10) ++near_plus;
            if (std::abs(l - closed.b_minus) < 1e-10) ++near_minus;
        }
        CHECK(near_plus == 2);
        CHECK(near_minus == 2);
    }
}

TEST_CASE("pt_eigenvector: closed-form example at gamma = 0") {
    // theta = 0, k = 1, gamma = 0, btilde = sqrt(2):
    // substitution gives (1, sqrt2 - 1, sqrt2 - 1, 1).
    const double bt = std::sqrt(2.0);
    const auto pe = pt_eigenvector({1.0, 0.0, 0}, bt, 0.0);
    const double s21 = std::sqrt(2.0) - 1.0;
    CHECK(std::abs(pe.v[0] - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(pe.v[1] - Complex(s21, 0)) < 1e-14);
    CHECK(std::abs(pe.v[2] - Complex(s21, 0)) < 1e-14);
    CHECK(std::abs(pe.v[3] - Complex(1, 0)) < 1e-14);
}

TEST_CASE("pt_eigenvector family: eigenvector and PT fixed point on a theta grid") {
    for (double g : {0.2, 0.8, 1.3}) {
        CouplerParams p{1.0, g, 0};
        const CMat h = build_H(p);
        for (int sign : {+1, -1}) {
            const double bt = btilde(p, sign);
            for (int it = 0; it < 24; ++it) {
                const double theta = it * (2.0 * M_PI / 24.0);
                const auto pe = pt_eigenvector(p, bt, theta);
                CHECK(std::abs(std::abs(pe.v[0]) - 1.0) < 1e-14);
                CHECK(std::abs(std::abs(pe.v[3]) - 1.0) < 1e-14);
                FieldState hv{};
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) hv[i] += h(i, j) * pe.v[j];
                for (int i = 0; i < 4; ++i) CHECK(std::abs(hv[i] - bt * pe.v[i]) < 1e-12);
                const FieldState ptv = pt_apply(pe.v);
                for (int i = 0; i < 4; ++i) CHECK(std::abs(ptv[i] - pe.v[i]) < 1e-12);
            }
        }
    }
}

TEST_CASE("pt_eigenvector refuses the broken phase") {
    REQUIRE_THROWS_AS(pt_eigenvector({1.0, 1.5, 0}, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("orthogonal pair") {
    CouplerParams p{1.0, 0.5, 0};
    const double bt = btilde(p, +1);
    const auto [w1, w2] = orthogonal_pair(p, bt);
    CHECK(w1.theta == 0.0);
    CHECK(w2.theta == Approx(0.9347497675587858).epsilon(1e-12));
    CHECK(std::abs(scalar_product(w1.v, w2.v)) < 1e-12);

    const CMat h = build_H(p);
    for (const auto* pe : {&w1, &w2}) {
        FieldState hv{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) hv[i] += h(i, j) * pe->v[j];
        for (int i = 0; i < 4; ++i) CHECK(std::abs(hv[i] - bt * pe->v[i]) < 1e-12);
    }

    REQUIRE_THROWS_AS(orthogonal_pair({1.0, 0.0, 0}, std::sqrt(2.0)), std::invalid_argument);
}

TEST_CASE("double eigenvalues are semisimple below breaking") {
    for (double g : {0.1, 0.7, 1.3}) {
        CouplerParams p{1.0, g, 0};
        for (int sign : {+1, -1}) {
            const double bt = btilde(p, sign);
            CMat m = build_H(p);
            for (int i = 0; i < 4; ++i) m(i, i) -= bt;
            CHECK(rank4(m, 1e-8) == 2);
        }
    }
}
