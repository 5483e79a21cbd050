// Test-only reference implementations, kept independent of the library's
// solver path on purpose.
#pragma once

#include <cmath>
#include <utility>

#include "dyadrl/linalg.hpp"
#include "dyadrl/rng.hpp"

namespace oracles {

/// Gaussian elimination with partial pivoting.
inline dyadrl::Vec gauss_solve(dyadrl::Mat a, dyadrl::Vec b) {
    const std::size_t n = a.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    dyadrl::Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t c = ii + 1; c < n; ++c) s -= a(ii, c) * x[c];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

/// Ridge mean via the normal equations, solved by Gaussian elimination:
/// (X^T X / sigma^2 + lambda I) b = X^T y / sigma^2 + lambda prior.
inline dyadrl::Vec ridge_mean_by_normal_equations(const dyadrl::Mat& x, const dyadrl::Vec& y,
                                                  double lambda, double sigma,
                                                  const dyadrl::Vec& prior) {
    const std::size_t d = x.cols;
    const double inv_s2 = 1.0 / (sigma * sigma);
    dyadrl::Mat a(d, d);
    dyadrl::Vec rhs(d, 0.0);
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = 0; q < d; ++q) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.rows; ++i) s += x(i, p) * x(i, q);
            a(p, q) = s * inv_s2;
        }
        a(p, p) += lambda;
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) s += x(i, p) * y[i];
        rhs[p] = s * inv_s2 + lambda * prior[p];
    }
    return gauss_solve(a, rhs);
}

inline dyadrl::Mat random_spd(std::size_t n, dyadrl::Rng& rng) {
    dyadrl::Mat g(n, n);
    for (auto& v : g.a) v = rng.gaussian();
    dyadrl::Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += g(i, k) * g(j, k);
            a(i, j) = s;
        }
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 0.5;
    return a;
}

}  // namespace oracles
