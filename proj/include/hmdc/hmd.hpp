#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "hmdc/dense.hpp"
#include "hmdc/error.hpp"
#include "hmdc/svd.hpp"

namespace hmdc {

// Hybrid matrix decomposition of an m×n matrix: the top r rows are stored
// densely (a_prime), the bottom m−r rows are two side-by-side rank-1 blocks
// b·cᵀ and d·eᵀ. c covers the first ⌈n/2⌉ columns, e the remaining ⌊n/2⌋,
// so odd n splits left-heavy. r = m is rejected: a fully dense matrix is a
// DenseMatrix, not a degenerate HmdMatrix.
class HmdMatrix {
public:
    HmdMatrix(std::size_t m, std::size_t n, std::size_t r,
              DenseMatrix a_prime, RealVector b, RealVector c,
              RealVector d, RealVector e)
        : m_(m), n_(n), r_(r),
          a_prime_(std::move(a_prime)),
          b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), e_(std::move(e)) {
        if (n_ < 2) {
            throw ParameterError("HmdMatrix: n must be >= 2");
        }
        if (r_ >= m_) {
            throw ParameterError("HmdMatrix: r must satisfy 0 <= r < m");
        }
        const std::size_t c_len = (n_ + 1) / 2;
        const std::size_t e_len = n_ / 2;
        if (a_prime_.rows() != r_ || a_prime_.cols() != n_) {
            throw ShapeError("HmdMatrix: a_prime must be r x n");
        }
        if (b_.len() != m_ - r_ || d_.len() != m_ - r_) {
            throw ShapeError("HmdMatrix: b and d must have length m - r");
        }
        if (c_.len() != c_len || e_.len() != e_len) {
            throw ShapeError("HmdMatrix: c and e must split n as ceil/floor");
        }
    }

    std::size_t m() const noexcept { return m_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t r() const noexcept { return r_; }
    std::size_t left_cols() const noexcept { return (n_ + 1) / 2; }
    std::size_t right_cols() const noexcept { return n_ / 2; }

    const DenseMatrix& a_prime() const noexcept { return a_prime_; }
    const RealVector& b() const noexcept { return b_; }
    const RealVector& c() const noexcept { return c_; }
    const RealVector& d() const noexcept { return d_; }
    const RealVector& e() const noexcept { return e_; }

private:
    std::size_t m_;
    std::size_t n_;
    std::size_t r_;
    DenseMatrix a_prime_;
    RealVector b_;
    RealVector c_;
    RealVector d_;
    RealVector e_;
};

// Expand to the full m×n matrix: rows 0..r-1 from a_prime, the rest the
// column-concatenation of b·cᵀ and d·eᵀ.
inline DenseMatrix hmd_reconstruct(const HmdMatrix& h) {
    const std::size_t m = h.m();
    const std::size_t n = h.n();
    const std::size_t r = h.r();
    const std::size_t nl = h.left_cols();

    std::vector<double> a(m * n, 0.0);
    const std::vector<double>& top = h.a_prime().data();
    std::copy(top.begin(), top.end(), a.begin());

    for (std::size_t i = r; i < m; ++i) {
        double* row = a.data() + i * n;
        const double bi = h.b()[i - r];
        const double di = h.d()[i - r];
        for (std::size_t j = 0; j < nl; ++j) row[j] = bi * h.c()[j];
        for (std::size_t j = nl; j < n; ++j) row[j] = di * h.e()[j - nl];
    }
    return DenseMatrix(m, n, std::move(a));
}

// Matrix-vector product without materializing the full matrix: the top block
// is a dense matvec, the bottom block reduces to two dot products followed
// by two scaled vectors.
inline RealVector hmd_matvec(const HmdMatrix& h, const RealVector& x) {
    if (x.len() != h.n()) {
        throw ShapeError("hmd_matvec: x.len != n");
    }
    const std::size_t m = h.m();
    const std::size_t n = h.n();
    const std::size_t r = h.r();
    const std::size_t nl = h.left_cols();

    std::vector<double> y(m, 0.0);
    const double* ad = h.a_prime().data().data();
    const double* xd = x.data().data();
    for (std::size_t i = 0; i < r; ++i) {
        double acc = 0.0;
        const double* row = ad + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * xd[j];
        y[i] = acc;
    }

    double t1 = 0.0;
    for (std::size_t j = 0; j < nl; ++j) t1 += h.c()[j] * xd[j];
    double t2 = 0.0;
    for (std::size_t j = nl; j < n; ++j) t2 += h.e()[j - nl] * xd[j];

    for (std::size_t i = r; i < m; ++i) {
        y[i] = h.b()[i - r] * t1 + h.d()[i - r] * t2;
    }
    return RealVector(std::move(y));
}

// Stored-element count: r·n + 2(m−r) + n. The ceil/floor column split keeps
// this exact for odd n.
inline std::size_t hmd_param_count(std::size_t m, std::size_t n, std::size_t r) {
    return r * n + 2 * (m - r) + n;
}

inline std::size_t hmd_param_count(const HmdMatrix& h) {
    return hmd_param_count(h.m(), h.n(), h.r());
}

// Dense-to-HMD storage ratio m·n / (r·n + 2·(m−r+n/2)); the denominator
// equals hmd_param_count for every n.
inline double hmd_storage_ratio(std::size_t m, std::size_t n, std::size_t r) {
    if (n < 2) {
        throw ParameterError("hmd_storage_ratio: n must be >= 2");
    }
    if (r >= m) {
        throw ParameterError("hmd_storage_ratio: r must satisfy 0 <= r < m");
    }
    return static_cast<double>(m * n) / static_cast<double>(hmd_param_count(m, n, r));
}

// Operation count of the compressed matvec: r·n for the dense block, n for
// the two dot products, 2(m−r) for the scaled vectors, m−r adds to combine.
inline std::size_t hmd_mac_count(std::size_t m, std::size_t n, std::size_t r) {
    return r * n + n + 2 * (m - r) + (m - r);
}

inline std::size_t hmd_mac_count(const HmdMatrix& h) {
    return hmd_mac_count(h.m(), h.n(), h.r());
}

// Largest r whose parameter count stays within m·n / target, i.e. the
// biggest dense block that still achieves at-least-target compression.
// Rounds downward so the achieved ratio is always >= target.
inline std::size_t hmd_rank_for_compression(std::size_t m, std::size_t n, double target) {
    if (n < 2 || m < 1) {
        throw ParameterError("hmd_rank_for_compression: need m >= 1, n >= 2");
    }
    if (!(target > 1.0)) {
        throw ParameterError("hmd_rank_for_compression: target must be > 1");
    }
    const double budget = static_cast<double>(m) * static_cast<double>(n) / target;
    if (static_cast<double>(hmd_param_count(m, n, 0)) > budget) {
        throw InfeasibleError("hmd_rank_for_compression: target not reachable even at r = 0");
    }

    std::size_t r = m - 1;
    if (n > 2) {
        // param(r) = r(n-2) + 2m + n is affine in r; solve then fix up.
        const double est = (budget - static_cast<double>(2 * m + n)) / static_cast<double>(n - 2);
        if (est < 0.0) {
            r = 0;
        } else if (est < static_cast<double>(m - 1)) {
            r = static_cast<std::size_t>(est);
        }
        while (r > 0 && static_cast<double>(hmd_param_count(m, n, r)) > budget) --r;
        while (r + 1 < m && static_cast<double>(hmd_param_count(m, n, r + 1)) <= budget) ++r;
    }
    return r;
}

// Project a trained dense matrix onto the HMD structure: top r rows copied
// verbatim, each bottom block replaced by its best rank-1 approximation.
inline HmdMatrix hmd_fit_from_dense(const DenseMatrix& a, std::size_t r) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (n < 2) {
        throw ParameterError("hmd_fit_from_dense: n must be >= 2");
    }
    if (r >= m) {
        throw ParameterError("hmd_fit_from_dense: r must satisfy 0 <= r < m");
    }
    const std::size_t nl = (n + 1) / 2;
    const std::size_t nr = n / 2;
    const std::size_t mb = m - r;

    std::vector<double> top(a.data().begin(), a.data().begin() + r * n);

    std::vector<double> left(mb * nl), right(mb * nr);
    for (std::size_t i = 0; i < mb; ++i) {
        const double* row = a.data().data() + (r + i) * n;
        for (std::size_t j = 0; j < nl; ++j) left[i * nl + j] = row[j];
        for (std::size_t j = 0; j < nr; ++j) right[i * nr + j] = row[nl + j];
    }

    auto [b, c] = rank1_fit(DenseMatrix(mb, nl, std::move(left)));
    auto [d, e] = rank1_fit(DenseMatrix(mb, nr, std::move(right)));

    return HmdMatrix(m, n, r, DenseMatrix(r, n, std::move(top)),
                     std::move(b), std::move(c), std::move(d), std::move(e));
}

} // namespace hmdc
