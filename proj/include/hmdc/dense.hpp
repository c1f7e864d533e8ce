#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "hmdc/error.hpp"

namespace hmdc {

namespace detail {

inline void require_finite(const std::vector<double>& data, const char* what) {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw ParameterError(std::string(what) + ": non-finite entry");
        }
    }
}

} // namespace detail

// Row-major dense matrix of 64-bit floats. Immutable after construction;
// constructors reject non-finite entries. Zero-sized matrices are
// representable (an HmdMatrix with r = 0 has an empty top block) but the
// fitters below require nonempty input.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw ShapeError("DenseMatrix: data length does not equal rows*cols");
        }
        detail::require_finite(data_, "DenseMatrix");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

class RealVector {
public:
    explicit RealVector(std::size_t len) : data_(len, 0.0) {}

    explicit RealVector(std::vector<double> data) : data_(std::move(data)) {
        detail::require_finite(data_, "RealVector");
    }

    std::size_t len() const noexcept { return data_.size(); }

    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::vector<double> data_;
};

// y_i = sum_j a(i,j) * x_j, accumulated in double.
inline RealVector dense_matvec(const DenseMatrix& a, const RealVector& x) {
    if (x.len() != a.cols()) {
        throw ShapeError("dense_matvec: x.len != a.cols");
    }
    std::vector<double> y(a.rows(), 0.0);
    const std::size_t n = a.cols();
    const double* ad = a.data().data();
    const double* xd = x.data().data();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        const double* row = ad + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            acc += row[j] * xd[j];
        }
        y[i] = acc;
    }
    return RealVector(std::move(y));
}

inline double frobenius_norm(const DenseMatrix& a) {
    double acc = 0.0;
    for (double v : a.data()) {
        acc += v * v;
    }
    return std::sqrt(acc);
}

} // namespace hmdc
