#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "ptquad/linalg.hpp"
#include "ptquad/spectrum.hpp"

using namespace ptquad;
using Catch::Approx;

namespace {

// Multiset comparison of spectra.
double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (const auto& x : a) {
        auto it = std::min_element(b.begin(), b.end(), [&x](const Complex& p, const Complex& q) {
            return std::abs(p - x) < std::abs(q - x);
        });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

// Random complex Givens similarity transforms: preserve the spectrum exactly
// while densifying the matrix.
void scramble(CMat& m, std::mt19937_64& rng, int sweeps = 3) {
    const int n = m.dim();
    auto uni = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    for (int s = 0; s < sweeps; ++s)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double c = std::cos(2.0 * M_PI * uni());
                const Complex sc = std::polar(std::sqrt(1.0 - c * c), 2.0 * M_PI * uni());
                for (int col = 0; col < n; ++col) {
                    const Complex a = m(i, col), b = m(j, col);
                    m(i, col) = c * a + sc * b;
                    m(j, col) = -std::conj(sc) * a + c * b;
                }
                for (int row = 0; row < n; ++row) {
                    const Complex a = m(row, i), b = m(row, j);
                    m(row, i) = c * a + std::conj(sc) * b;
                    m(row, j) = -sc * a + c * b;
                }
            }
}

}  // namespace

TEST_CASE("dimension guards") {
    REQUIRE_THROWS_AS(CMat(9), std::invalid_argument);
    REQUIRE_THROWS_AS(CMat(0), std::invalid_argument);
    REQUIRE_THROWS_AS(RMat(13), std::invalid_argument);
}

TEST_CASE("lu_solve recovers known solutions") {
    std::mt19937_64 rng(3);
    auto uni = [&rng]() { return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0; };
    for (int n : {2, 5, 8, 9, 12}) {
        RMat a(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = uni();
            a(i, i) += 3.0;  // keep it well conditioned
        }
        std::array<double, kMaxRealDim> x{}, rhs{};
        for (int i = 0; i < n; ++i) x[i] = uni();
        for (int i = 0; i < n; ++i) {
            rhs[i] = 0.0;
            for (int j = 0; j < n; ++j) rhs[i] += a(i, j) * x[j];
        }
        const double pivot = lu_solve(a, rhs);
        REQUIRE(pivot > 0.1);
        for (int i = 0; i < n; ++i) CHECK(rhs[i] == Approx(x[i]).margin(1e-11));
    }
}

TEST_CASE("lu_solve flags singular systems") {
    RMat a(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = static_cast<double>(i + 1);  // rank 1
    std::array<double, kMaxRealDim> b{1.0, 2.0, 3.0};
    CHECK(lu_solve(a, b) == 0.0);
}

TEST_CASE("eigen_numeric: diagonal example") {
    CMat m(4);
    m(0, 0) = 1.0;
    m(1, 1) = Complex(0, 2);
    m(2, 2) = -3.0;
    m(3, 3) = 0.0;
    const auto eig = eigen_numeric(m);
    CHECK(spectrum_distance(eig, {Complex(1), Complex(0, 2), Complex(-3), Complex(0)}) < 1e-12);
}

TEST_CASE("eigen_numeric: companion matrix of lambda^2 + 1") {
    CMat m(2);
    m(0, 1) = -1.0;
    m(1, 0) = 1.0;
    const auto eig = eigen_numeric(m);
    CHECK(spectrum_distance(eig, {Complex(0, 1), Complex(0, -1)}) < 1e-12);
}

TEST_CASE("eigen_numeric matches the closed-form quadrimer spectrum") {
    CouplerParams p{1.0, 0.5, 0};
    const auto eig = eigen_numeric(build_H(p));
    const double bt = std::sqrt(2.0 - 0.25);
    CHECK(bt == Approx(1.3228756555322954).epsilon(1e-12));
    CHECK(spectrum_distance(eig, {Complex(bt), Complex(bt), Complex(-bt), Complex(-bt)}) < 1e-10);
}

TEST_CASE("eigen_numeric on scrambled triangular matrices (non-normal oracle)") {
    std::mt19937_64 rng(17);
    auto uni = [&rng]() { return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0; };
    for (int n : {3, 5, 8}) {
        for (int rep = 0; rep < 6; ++rep) {
            CMat m(n);
            std::vector<Complex> diag;
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) m(i, j) = Complex(uni(), uni());
                // keep eigenvalues separated for a well-conditioned test
                m(i, i) = Complex(2.0 * i + uni(), uni());
                diag.push_back(m(i, i));
            }
            scramble(m, rng);
            const auto eig = eigen_numeric(m);
            CHECK(spectrum_distance(eig, diag) < 1e-10);
        }
    }
}

TEST_CASE("eigen_numeric: real-matrix spectra are conjugate closed") {
    std::mt19937_64 rng(23);
    auto uni = [&rng]() { return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0; };
    for (int rep = 0; rep < 5; ++rep) {
        RMat m(8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) m(i, j) = uni();
        auto eig = eigen_numeric(m);
        std::vector<Complex> conj;
        for (const auto& l : eig) conj.push_back(std::conj(l));
        CHECK(spectrum_distance(eig, conj) < 1e-9);
    }
}

TEST_CASE("eigen_numeric rejects non-finite input") {
    CMat m(2);
    m(0, 0) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    REQUIRE_THROWS_AS(eigen_numeric(m), std::invalid_argument);
}
