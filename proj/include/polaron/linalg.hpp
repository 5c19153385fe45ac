#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace polaron {

// Dense square matrix, row-major. Sized for the small per-excursion systems
// (n is the number of intervals, typically single digits).
struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(std::size_t n_) : n(n_), a(n_ * n_, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// In-place lower Cholesky factor. Returns false if the matrix is not
// (numerically) positive definite.
inline bool cholesky_inplace(Matrix& m) {
    const std::size_t n = m.n;
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        m(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
            m(i, j) = s / ljj;
        }
    }
    return true;
}

// Solves L L^T x = b in place given the lower factor L.
inline void cholesky_solve(const Matrix& L, std::span<double> b) {
    const std::size_t n = L.n;
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * b[k];
        b[i] = s / L(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= L(k, i) * b[k];
        b[i] = s / L(i, i);
    }
}

// log det(A) = 2 * sum log diag(L).
inline double cholesky_logdet(const Matrix& L) {
    double s = 0.0;
    for (std::size_t i = 0; i < L.n; ++i) s += std::log(L(i, i));
    return 2.0 * s;
}

}  // namespace polaron
