#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "hmdc/dense.hpp"
#include "hmdc/error.hpp"
#include "hmdc/svd.hpp"

namespace hmdc {

// Low-rank factorization A ≈ U·V with U m×d and V d×n; d controls the
// compression factor.
class LmfMatrix {
public:
    LmfMatrix(DenseMatrix u, DenseMatrix v)
        : u_(std::move(u)), v_(std::move(v)) {
        if (u_.cols() != v_.rows()) {
            throw ShapeError("LmfMatrix: inner dimensions of u and v differ");
        }
        const std::size_t d = u_.cols();
        if (d < 1 || d > std::min(u_.rows(), v_.cols())) {
            throw ParameterError("LmfMatrix: need 1 <= d <= min(m, n)");
        }
    }

    std::size_t m() const noexcept { return u_.rows(); }
    std::size_t n() const noexcept { return v_.cols(); }
    std::size_t d() const noexcept { return u_.cols(); }

    const DenseMatrix& u() const noexcept { return u_; }
    const DenseMatrix& v() const noexcept { return v_; }

private:
    DenseMatrix u_;
    DenseMatrix v_;
};

// U·(V·x): two small products instead of one m×n product.
inline RealVector lmf_matvec(const LmfMatrix& l, const RealVector& x) {
    if (x.len() != l.n()) {
        throw ShapeError("lmf_matvec: x.len != n");
    }
    return dense_matvec(l.u(), dense_matvec(l.v(), x));
}

// Explicit U·V product; the oracle expansion for tests and densify.
inline DenseMatrix lmf_reconstruct(const LmfMatrix& l) {
    const std::size_t m = l.m();
    const std::size_t n = l.n();
    const std::size_t d = l.d();
    std::vector<double> a(m * n, 0.0);
    const double* ud = l.u().data().data();
    const double* vd = l.v().data().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double uik = ud[i * d + k];
            if (uik == 0.0) continue;
            const double* vrow = vd + k * n;
            double* arow = a.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) arow[j] += uik * vrow[j];
        }
    }
    return DenseMatrix(m, n, std::move(a));
}

inline std::size_t lmf_param_count(std::size_t m, std::size_t n, std::size_t d) {
    return d * (m + n);
}

inline std::size_t lmf_param_count(const LmfMatrix& l) {
    return lmf_param_count(l.m(), l.n(), l.d());
}

// The two-stage matvec performs d·n + d·m multiply-accumulates.
inline std::size_t lmf_mac_count(std::size_t m, std::size_t n, std::size_t d) {
    return d * (m + n);
}

inline std::size_t lmf_mac_count(const LmfMatrix& l) {
    return lmf_mac_count(l.m(), l.n(), l.d());
}

// d = ⌊m·n / (target·(m+n))⌋, floored so the achieved ratio is >= target.
inline std::size_t lmf_rank_for_compression(std::size_t m, std::size_t n, double target) {
    if (m < 1 || n < 1) {
        throw ParameterError("lmf_rank_for_compression: need m, n >= 1");
    }
    if (!(target > 0.0)) {
        throw ParameterError("lmf_rank_for_compression: target must be positive");
    }
    const double raw = static_cast<double>(m) * static_cast<double>(n) /
                       (target * static_cast<double>(m + n));
    const std::size_t d = static_cast<std::size_t>(raw);
    if (d < 1) {
        throw InfeasibleError("lmf_rank_for_compression: target not reachable even at d = 1");
    }
    return std::min(d, std::min(m, n));
}

// Frobenius-optimal rank-d approximation, repackaged from truncated_svd.
inline LmfMatrix lmf_fit_from_dense(const DenseMatrix& a, std::size_t d) {
    auto [u, v] = truncated_svd(a, d);
    return LmfMatrix(std::move(u), std::move(v));
}

} // namespace hmdc
