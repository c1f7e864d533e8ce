#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "hmdc/dense.hpp"
#include "hmdc/error.hpp"

namespace hmdc {

// Compressed sparse row matrix. Column indices are strictly increasing
// within each row and explicit zeros are never stored. Indices are 32-bit,
// matching the on-disk container width.
class CsrMatrix {
public:
    CsrMatrix(std::size_t m, std::size_t n,
              std::vector<double> values,
              std::vector<std::uint32_t> col_idx,
              std::vector<std::uint32_t> row_ptr)
        : m_(m), n_(n),
          values_(std::move(values)),
          col_idx_(std::move(col_idx)),
          row_ptr_(std::move(row_ptr)) {
        if (row_ptr_.size() != m_ + 1 || row_ptr_.front() != 0 ||
            row_ptr_.back() != values_.size() || col_idx_.size() != values_.size()) {
            throw ShapeError("CsrMatrix: inconsistent array lengths");
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (row_ptr_[i] > row_ptr_[i + 1]) {
                throw ParameterError("CsrMatrix: row_ptr must be non-decreasing");
            }
            for (std::uint32_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (col_idx_[k] >= n_) {
                    throw ParameterError("CsrMatrix: column index out of range");
                }
                if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
                    throw ParameterError("CsrMatrix: columns must be strictly increasing per row");
                }
            }
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw ParameterError("CsrMatrix: non-finite value");
            }
            if (v == 0.0) {
                throw ParameterError("CsrMatrix: explicit zero stored");
            }
        }
    }

    std::size_t m() const noexcept { return m_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::uint32_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<std::uint32_t>& row_ptr() const noexcept { return row_ptr_; }

private:
    std::size_t m_;
    std::size_t n_;
    std::vector<double> values_;
    std::vector<std::uint32_t> col_idx_;
    std::vector<std::uint32_t> row_ptr_;
};

// Keep the k = ⌊m·n/target⌋ largest-magnitude entries; magnitude ties break
// toward the smaller (row, col). Entries that are exactly zero are dropped
// even when selected, so the no-explicit-zeros invariant holds for inputs
// that already contain zeros.
inline CsrMatrix prune_by_magnitude(const DenseMatrix& a, double target_compression) {
    if (!(target_compression >= 1.0)) {
        throw ParameterError("prune_by_magnitude: target must be >= 1");
    }
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const std::size_t total = m * n;
    const double raw_k = static_cast<double>(total) / target_compression;
    const std::size_t k = std::min(total, static_cast<std::size_t>(raw_k));

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        const double la = std::abs(a.data()[lhs]);
        const double ra = std::abs(a.data()[rhs]);
        if (la != ra) return la > ra;
        return lhs < rhs; // flat index order == (row, col) lexicographic
    });

    std::vector<std::size_t> kept;
    kept.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (a.data()[order[i]] != 0.0) kept.push_back(order[i]);
    }
    std::sort(kept.begin(), kept.end());

    std::vector<double> values;
    std::vector<std::uint32_t> col_idx;
    std::vector<std::uint32_t> row_ptr(m + 1, 0);
    values.reserve(kept.size());
    col_idx.reserve(kept.size());
    for (std::size_t flat : kept) {
        const std::size_t i = flat / n;
        const std::size_t j = flat % n;
        values.push_back(a.data()[flat]);
        col_idx.push_back(static_cast<std::uint32_t>(j));
        ++row_ptr[i + 1];
    }
    for (std::size_t i = 0; i < m; ++i) row_ptr[i + 1] += row_ptr[i];

    return CsrMatrix(m, n, std::move(values), std::move(col_idx), std::move(row_ptr));
}

inline RealVector csr_matvec(const CsrMatrix& s, const RealVector& x) {
    if (x.len() != s.n()) {
        throw ShapeError("csr_matvec: x.len != n");
    }
    std::vector<double> y(s.m(), 0.0);
    const double* xd = x.data().data();
    for (std::size_t i = 0; i < s.m(); ++i) {
        double acc = 0.0;
        for (std::uint32_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k) {
            acc += s.values()[k] * xd[s.col_idx()[k]];
        }
        y[i] = acc;
    }
    return RealVector(std::move(y));
}

// Storage accounting split so reports can show weight-only compression and
// the true cost including traversal indices.
struct CsrParamCount {
    std::size_t weights = 0;        // stored values
    std::size_t index_overhead = 0; // column indices + row pointers
};

inline CsrParamCount csr_param_count(const CsrMatrix& s) {
    CsrParamCount c;
    c.weights = s.nnz();
    c.index_overhead = s.nnz() + (s.m() + 1);
    return c;
}

inline DenseMatrix csr_densify(const CsrMatrix& s) {
    std::vector<double> a(s.m() * s.n(), 0.0);
    for (std::size_t i = 0; i < s.m(); ++i) {
        for (std::uint32_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k) {
            a[i * s.n() + s.col_idx()[k]] = s.values()[k];
        }
    }
    return DenseMatrix(s.m(), s.n(), std::move(a));
}

} // namespace hmdc
