// Small dense linear algebra for the quadrimer problem: complex matrices up
// to 8x8 with a non-Hermitian eigenvalue solver (balancing + Householder
// Hessenberg reduction + explicitly shifted QR with deflation), and real LU
// solves for the Newton/continuation systems.
//
// Everything here is fixed-capacity and allocation-free except for the
// returned eigenvalue vectors. Dimensions beyond the capacity are rejected.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ptquad {

using Complex = std::complex<double>;

inline constexpr int kMaxEigenDim = 8;

// Dense complex matrix, runtime dimension n <= kMaxEigenDim.
class CMat {
public:
    explicit CMat(int n) : n_(n) {
        if (n < 1 || n > kMaxEigenDim)
            throw std::invalid_argument("CMat: dimension must be in [1, 8]");
    }

    int dim() const { return n_; }

    Complex& operator()(int i, int j) { return a_[i * kMaxEigenDim + j]; }
    const Complex& operator()(int i, int j) const { return a_[i * kMaxEigenDim + j]; }

    bool finite() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                const Complex& v = (*this)(i, j);
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
            }
        return true;
    }

private:
    int n_;
    std::array<Complex, kMaxEigenDim * kMaxEigenDim> a_{};
};

// Dense real matrix for the gauge-fixed Newton and bordered arclength systems.
// Capacity 12 covers the largest system in use (8 + 1 border).
inline constexpr int kMaxRealDim = 12;

class RMat {
public:
    explicit RMat(int n) : n_(n) {
        if (n < 1 || n > kMaxRealDim)
            throw std::invalid_argument("RMat: dimension must be in [1, 12]");
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[i * kMaxRealDim + j]; }
    const double& operator()(int i, int j) const { return a_[i * kMaxRealDim + j]; }

private:
    int n_;
    std::array<double, kMaxRealDim * kMaxRealDim> a_{};
};

// Solves A x = b in place (b becomes x) by LU with partial pivoting.
// Returns the smallest absolute pivot encountered, which callers use to
// detect near-singular (degenerate) systems; returns 0.0 on exact breakdown.
inline double lu_solve(RMat a, std::array<double, kMaxRealDim>& b) {
    const int n = a.dim();
    double min_pivot = std::numeric_limits<double>::infinity();
    std::array<int, kMaxRealDim> perm{};
    for (int i = 0; i < n; ++i) perm[i] = i;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(a(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        min_pivot = std::min(min_pivot, best);
        const double inv = 1.0 / a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv;
            if (f == 0.0) continue;
            a(r, col) = 0.0;
            for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            b[r] -= f * b[col];
        }
    }
    for (int row = n - 1; row >= 0; --row) {
        double s = b[row];
        for (int j = row + 1; j < n; ++j) s -= a(row, j) * b[j];
        b[row] = s / a(row, row);
    }
    return min_pivot;
}

namespace detail {

// One pass of radix-2 balancing (diagonal similarity), LAPACK-style.
inline void balance(CMat& h) {
    const int n = h.dim();
    const double radix = 2.0;
    bool converged = false;
    int sweeps = 0;
    while (!converged && sweeps++ < 32) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(h(j, i));
                r += std::abs(h(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / radix) { c *= radix; r /= radix; f *= radix; }
            while (c > r * radix) { c /= radix; r *= radix; f /= radix; }
            if (c + r < 0.95 * s && f != 1.0) {
                converged = false;
                for (int j = 0; j < n; ++j) h(i, j) /= f;
                for (int j = 0; j < n; ++j) h(j, i) *= f;
            }
        }
    }
}

// Householder reduction to upper Hessenberg form.
inline void hessenberg(CMat& h) {
    const int n = h.dim();
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
        if (scale == 0.0) continue;

        std::array<Complex, kMaxEigenDim> v{};
        double norm2 = 0.0;
        for (int i = k + 1; i < n; ++i) {
            v[i] = h(i, k) / scale;
            norm2 += std::norm(v[i]);
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) continue;
        Complex alpha = v[k + 1];
        const Complex phase = (std::abs(alpha) == 0.0) ? Complex(1.0) : alpha / std::abs(alpha);
        const Complex beta = -phase * norm;
        v[k + 1] -= beta;
        double vnorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 == 0.0) continue;

        // H <- (I - 2 v v^H / v^H v) H
        for (int j = k; j < n; ++j) {
            Complex s(0.0);
            for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
            s *= 2.0 / vnorm2;
            for (int i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
        }
        // H <- H (I - 2 v v^H / v^H v)
        for (int i = 0; i < n; ++i) {
            Complex s(0.0);
            for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            s *= 2.0 / vnorm2;
            for (int j = k + 1; j < n; ++j) h(i, j) -= s * std::conj(v[j]);
        }
        h(k + 1, k) = beta * scale;
        for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

struct Givens {
    double c;
    Complex s;
};

inline Givens make_givens(Complex f, Complex g) {
    if (std::abs(g) == 0.0) return {1.0, Complex(0.0)};
    if (std::abs(f) == 0.0) return {0.0, std::conj(g) / std::abs(g)};
    const double d = std::hypot(std::abs(f), std::abs(g));
    const Complex fs = f / std::abs(f);
    return {std::abs(f) / d, fs * std::conj(g) / d};
}

// Eigenvalues of the complex 2x2 block [[a,b],[c,d]]; first entry is the
// Wilkinson choice (closer to d).
inline std::pair<Complex, Complex> eig2(Complex a, Complex b, Complex c, Complex d) {
    const Complex tr2 = 0.5 * (a + d);
    const Complex disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
    const Complex l1 = tr2 + disc;
    const Complex l2 = tr2 - disc;
    if (std::abs(l1 - d) <= std::abs(l2 - d)) return {l1, l2};
    return {l2, l1};
}

}  // namespace detail

// All n eigenvalues (with multiplicity) of a dense complex matrix, n <= 8.
// Throws std::runtime_error if the QR iteration does not converge within
// 100*n steps.
inline std::vector<Complex> eigen_numeric(CMat m) {
    if (!m.finite()) throw std::invalid_argument("eigen_numeric: non-finite entries");
    const int n = m.dim();
    std::vector<Complex> eig(n);
    if (n == 1) { eig[0] = m(0, 0); return eig; }

    detail::balance(m);
    detail::hessenberg(m);

    const double eps = std::numeric_limits<double>::epsilon();
    int hi = n - 1;
    int iters_total = 0;
    int iters_block = 0;
    const int max_iters = 100 * n;

    while (hi >= 0) {
        // Deflate tiny subdiagonals, then find the active block [lo, hi].
        int lo = hi;
        while (lo > 0) {
            const double sub = std::abs(m(lo, lo - 1));
            if (sub <= eps * (std::abs(m(lo - 1, lo - 1)) + std::abs(m(lo, lo)))) {
                m(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }

        if (lo == hi) {
            eig[hi] = m(hi, hi);
            --hi;
            iters_block = 0;
            continue;
        }
        if (lo == hi - 1) {
            const auto [l1, l2] = detail::eig2(m(lo, lo), m(lo, hi), m(hi, lo), m(hi, hi));
            eig[hi] = l1;
            eig[lo] = l2;
            hi -= 2;
            iters_block = 0;
            continue;
        }

        if (++iters_total > max_iters)
            throw std::runtime_error("eigen_numeric: QR iteration did not converge");

        Complex shift;
        if (++iters_block % 12 == 0) {
            // Exceptional shift to break rare cycling.
            shift = m(hi, hi) + 0.75 * std::abs(m(hi, hi - 1));
        } else {
            shift = detail::eig2(m(hi - 1, hi - 1), m(hi - 1, hi), m(hi, hi - 1), m(hi, hi)).first;
        }

        for (int i = lo; i <= hi; ++i) m(i, i) -= shift;

        // QR sweep with Givens rotations on the Hessenberg block.
        std::array<detail::Givens, kMaxEigenDim> rot{};
        for (int i = lo; i < hi; ++i) {
            const auto g = detail::make_givens(m(i, i), m(i + 1, i));
            rot[i] = g;
            for (int j = i; j <= hi; ++j) {
                const Complex t1 = m(i, j);
                const Complex t2 = m(i + 1, j);
                m(i, j) = g.c * t1 + g.s * t2;
                m(i + 1, j) = -std::conj(g.s) * t1 + g.c * t2;
            }
        }
        // Form R Q (apply the adjoint rotations on the right).
        for (int i = lo; i < hi; ++i) {
            const auto& g = rot[i];
            const int top = std::min(i + 2, hi);
            for (int r = lo; r <= top; ++r) {
                const Complex t1 = m(r, i);
                const Complex t2 = m(r, i + 1);
                m(r, i) = g.c * t1 + std::conj(g.s) * t2;
                m(r, i + 1) = -g.s * t1 + g.c * t2;
            }
        }
        for (int i = lo; i <= hi; ++i) m(i, i) += shift;
    }
    return eig;
}

// Eigenvalues of a real matrix supplied as RMat (used for the 8x8 stability
// linearizations); promotes to complex, defers to eigen_numeric, and then
// enforces the exact conjugate closure a real spectrum must have (the
// complex QR iteration only preserves it to roundoff, which matters near
// defective eigenvalues).
inline std::vector<Complex> eigen_numeric(const RMat& m) {
    if (m.dim() > kMaxEigenDim)
        throw std::invalid_argument("eigen_numeric: real matrix exceeds complex capacity");
    CMat c(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) c(i, j) = m(i, j);
    auto eig = eigen_numeric(c);

    // Greedily pair each eigenvalue with the best match for its conjugate
    // and replace the pair by an exactly conjugate one.
    std::vector<bool> used(eig.size(), false);
    for (size_t i = 0; i < eig.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        size_t best = i;
        double best_d = std::abs(eig[i] - std::conj(eig[i]));
        for (size_t j = 0; j < eig.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(eig[j] - std::conj(eig[i]));
            if (d < best_d) { best_d = d; best = j; }
        }
        if (best == i) {
            eig[i] = Complex(eig[i].real(), 0.0);
        } else {
            used[best] = true;
            const Complex v = 0.5 * (eig[i] + std::conj(eig[best]));
            eig[i] = v;
            eig[best] = std::conj(v);
        }
    }
    return eig;
}

}  // namespace ptquad
