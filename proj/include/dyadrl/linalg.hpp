#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dyadrl/errors.hpp"

namespace dyadrl {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sized for the small systems in this project
/// (d <= 40), so no blocking or pivoting heroics.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

inline double dot(const Vec& x, const Vec& y) {
    DYADRL_CHECK(x.size() == y.size(), "dot: size mismatch");
    return dot(x.data(), y.data(), x.size());
}

/// Cholesky factorization of a symmetric positive definite matrix.
/// Returns lower-triangular L with A = L L^T; throws if A is not SPD.
inline Mat cholesky(const Mat& a) {
    DYADRL_CHECK(a.rows == a.cols, "cholesky: matrix not square");
    const std::size_t n = a.rows;
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d))
            throw ContractViolation("cholesky: matrix not positive definite");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

/// Solve L y = b (forward substitution), L lower-triangular.
inline Vec forward_solve(const Mat& l, const Vec& b) {
    const std::size_t n = l.rows;
    DYADRL_CHECK(b.size() == n, "forward_solve: size mismatch");
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

/// Solve L^T x = y (backward substitution on the transpose of lower L).
inline Vec backward_solve_transposed(const Mat& l, const Vec& y) {
    const std::size_t n = l.rows;
    DYADRL_CHECK(y.size() == n, "backward_solve: size mismatch");
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

/// Solve A x = b given the Cholesky factor L of A.
inline Vec chol_solve(const Mat& l, const Vec& b) {
    return backward_solve_transposed(l, forward_solve(l, b));
}

/// A^{-1} from the Cholesky factor of A, symmetrized to kill roundoff skew.
inline Mat chol_inverse(const Mat& l) {
    const std::size_t n = l.rows;
    Mat inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        Vec col = chol_solve(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = s;
            inv(j, i) = s;
        }
    return inv;
}

inline double max_abs_residual(const Mat& a, const Vec& x, const Vec& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = -b[i];
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

}  // namespace dyadrl
