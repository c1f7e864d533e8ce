#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "hmdc/dense.hpp"
#include "hmdc/error.hpp"
#include "hmdc/random.hpp"

namespace hmdc {

namespace detail {

// Fixed seed for iteration start vectors; fitters are reproducible across
// runs and machines.
inline constexpr std::uint64_t kPowerIterationSeed = 0x484d444331ULL; // "HMDC1"

inline constexpr double kRayleighTol = 1e-12;
inline constexpr std::size_t kMaxPowerIterations = 10'000;

inline double norm2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// w = M v and w = M^T v over a raw row-major buffer.
inline void row_major_matvec(const double* m, std::size_t rows, std::size_t cols,
                             const std::vector<double>& v, std::vector<double>& out) {
    out.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* row = m + i * cols;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
}

inline void row_major_matvec_t(const double* m, std::size_t rows, std::size_t cols,
                               const std::vector<double>& v, std::vector<double>& out) {
    out.assign(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = m + i * cols;
        const double vi = v[i];
        for (std::size_t j = 0; j < cols; ++j) out[j] += row[j] * vi;
    }
}

// Flip signs so the first nonzero of v is positive; u·vᵀ is unchanged.
inline void canonicalize_pair(std::vector<double>& u, std::vector<double>& v) {
    for (double x : v) {
        if (x != 0.0) {
            if (x < 0.0) {
                for (double& e : u) e = -e;
                for (double& e : v) e = -e;
            }
            return;
        }
    }
}

// Dominant singular pair of the row-major buffer: v unit-norm with
// nonnegative leading entry, u = M·v (singular value absorbed). Power
// iteration on MᵀM from a fixed-seed start vector, stopped when the
// Rayleigh quotient moves less than kRayleighTol between iterations.
// A zero matrix yields zero vectors.
inline std::pair<std::vector<double>, std::vector<double>>
dominant_pair(const double* m, std::size_t rows, std::size_t cols) {
    SeededRng rng(kPowerIterationSeed);
    std::vector<double> v = rng.uniform_vector(cols);
    std::vector<double> u(rows, 0.0);
    std::vector<double> w(cols, 0.0);

    double vn = norm2(v);
    if (vn == 0.0) {
        v[0] = 1.0;
        vn = 1.0;
    }
    for (double& e : v) e /= vn;

    row_major_matvec(m, rows, cols, v, u);
    if (norm2(u) == 0.0) {
        // Start vector landed in the null space; probe coordinate axes.
        bool found = false;
        for (std::size_t j = 0; j < cols && !found; ++j) {
            std::fill(v.begin(), v.end(), 0.0);
            v[j] = 1.0;
            row_major_matvec(m, rows, cols, v, u);
            found = norm2(u) != 0.0;
        }
        if (!found) {
            return {std::vector<double>(rows, 0.0), std::vector<double>(cols, 0.0)};
        }
    }

    double sigma_prev = -1.0;
    for (std::size_t iter = 0; iter < kMaxPowerIterations; ++iter) {
        row_major_matvec(m, rows, cols, v, u);
        const double sigma = norm2(u);
        if (sigma == 0.0) break;
        row_major_matvec_t(m, rows, cols, u, w);
        const double wn = norm2(w);
        if (wn == 0.0) break;
        for (std::size_t j = 0; j < cols; ++j) v[j] = w[j] / wn;
        if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) < kRayleighTol) break;
        sigma_prev = sigma;
    }

    row_major_matvec(m, rows, cols, v, u);
    canonicalize_pair(u, v);
    return {std::move(u), std::move(v)};
}

// Modified Gram-Schmidt with one reorthogonalization pass. Columns that
// vanish stay zero instead of normalizing noise.
inline void orthonormalize(std::vector<std::vector<double>>& cols) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < j; ++i) {
                const double proj = dot(cols[i], cols[j]);
                if (proj == 0.0) continue;
                for (std::size_t t = 0; t < cols[j].size(); ++t) {
                    cols[j][t] -= proj * cols[i][t];
                }
            }
        }
        const double nrm = norm2(cols[j]);
        if (nrm > 1e-300) {
            for (double& x : cols[j]) x /= nrm;
        } else {
            std::fill(cols[j].begin(), cols[j].end(), 0.0);
        }
    }
}

// One-sided Jacobi on the small core: orthogonalizes the columns of c in
// place while accumulating the right rotations into j_acc. Afterwards each
// column of c is a left singular direction scaled by its singular value and
// j_acc holds the right singular vectors.
inline void jacobi_core(std::vector<std::vector<double>>& c,
                        std::vector<std::vector<double>>& j_acc) {
    const std::size_t k = c.size();
    j_acc.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) j_acc[j][j] = 1.0;

    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double app = dot(c[p], c[p]);
                const double aqq = dot(c[q], c[q]);
                const double apq = dot(c[p], c[q]);
                if (apq == 0.0 || std::abs(apq) <= 1e-15 * std::sqrt(app * aqq)) continue;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t =
                    (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < k; ++i) {
                    const double cp = c[p][i];
                    const double cq = c[q][i];
                    c[p][i] = cs * cp - sn * cq;
                    c[q][i] = sn * cp + cs * cq;
                    const double jp = j_acc[p][i];
                    const double jq = j_acc[q][i];
                    j_acc[p][i] = cs * jp - sn * jq;
                    j_acc[q][i] = sn * jp + cs * jq;
                }
                rotated = true;
            }
        }
        if (!rotated) break;
    }
}

// Orthonormal bases for the dominant column and row spaces via randomized
// subspace iteration with a fixed seed. Alternation stops once the captured
// energy ‖AᵀY‖_F² is stationary; oversampling in ell makes interior
// singular-value clusters harmless.
inline void two_sided_compress(const double* a, std::size_t m, std::size_t n, std::size_t ell,
                               std::vector<std::vector<double>>& y_cols,
                               std::vector<std::vector<double>>& v_cols) {
    SeededRng rng(kPowerIterationSeed ^ 0x9e3779b97f4a7c15ULL);

    y_cols.assign(ell, std::vector<double>(m, 0.0));
    std::vector<double> omega(n);
    for (std::size_t j = 0; j < ell; ++j) {
        for (double& x : omega) x = rng.uniform();
        row_major_matvec(a, m, n, omega, y_cols[j]);
    }
    orthonormalize(y_cols);

    // The captured energy ‖AᵀY‖² is monotone toward the top-ell optimum;
    // once its per-iteration change is negligible (or the iteration cap is
    // hit) further sweeps cannot move any reported residual measurably.
    v_cols.assign(ell, std::vector<double>(n, 0.0));
    double energy_prev = -1.0;
    for (std::size_t iter = 0; iter < 60; ++iter) {
        double energy = 0.0;
        for (std::size_t j = 0; j < ell; ++j) {
            row_major_matvec_t(a, m, n, y_cols[j], v_cols[j]);
            energy += dot(v_cols[j], v_cols[j]);
        }
        orthonormalize(v_cols);
        if (energy_prev >= 0.0 &&
            std::abs(energy - energy_prev) <= 1e-12 * std::max(1.0, energy)) {
            break;
        }
        energy_prev = energy;
        for (std::size_t j = 0; j < ell; ++j) {
            row_major_matvec(a, m, n, v_cols[j], y_cols[j]);
        }
        orthonormalize(y_cols);
    }
}

struct CoreSvd {
    // Descending singular values with their left/right core vectors.
    std::vector<double> sigma;
    std::vector<std::vector<double>> u_scaled; // left direction * sigma
    std::vector<std::vector<double>> v;
};

// Compress a onto ell dominant directions and factor the small core.
inline CoreSvd core_svd(const double* a, std::size_t m, std::size_t n, std::size_t ell,
                        std::vector<std::vector<double>>& y_cols,
                        std::vector<std::vector<double>>& v_cols) {
    two_sided_compress(a, m, n, ell, y_cols, v_cols);

    // Core c = Yᵀ A V, stored column-wise.
    std::vector<std::vector<double>> c(ell, std::vector<double>(ell, 0.0));
    std::vector<double> work(m, 0.0);
    for (std::size_t j = 0; j < ell; ++j) {
        row_major_matvec(a, m, n, v_cols[j], work);
        for (std::size_t i = 0; i < ell; ++i) c[j][i] = dot(y_cols[i], work);
    }

    std::vector<std::vector<double>> j_acc;
    jacobi_core(c, j_acc);

    CoreSvd out;
    out.sigma.resize(ell);
    for (std::size_t j = 0; j < ell; ++j) out.sigma[j] = norm2(c[j]);

    std::vector<std::size_t> order(ell);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return out.sigma[x] > out.sigma[y]; });

    CoreSvd sorted;
    sorted.sigma.reserve(ell);
    sorted.u_scaled.reserve(ell);
    sorted.v.reserve(ell);
    for (std::size_t idx : order) {
        sorted.sigma.push_back(out.sigma[idx]);
        sorted.u_scaled.push_back(std::move(c[idx]));
        sorted.v.push_back(std::move(j_acc[idx]));
    }
    return sorted;
}

// All singular values of a, descending.
inline std::vector<double> singular_spectrum(const DenseMatrix& a) {
    const std::size_t ell = std::min(a.rows(), a.cols());
    std::vector<std::vector<double>> y_cols, v_cols;
    const CoreSvd core = core_svd(a.data().data(), a.rows(), a.cols(), ell, y_cols, v_cols);
    return core.sigma;
}

} // namespace detail

// Best rank-1 approximation u·vᵀ in Frobenius norm: u absorbs the singular
// value, v has unit norm and nonnegative leading entry. Deterministic for a
// fixed input. The zero matrix maps to zero vectors.
inline std::pair<RealVector, RealVector> rank1_fit(const DenseMatrix& a) {
    if (a.empty()) {
        throw ParameterError("rank1_fit: matrix must be nonempty");
    }
    auto [u, v] = detail::dominant_pair(a.data().data(), a.rows(), a.cols());
    return {RealVector(std::move(u)), RealVector(std::move(v))};
}

// Best rank-d approximation u·v (u: m×d, v: d×n): randomized subspace
// compression onto d plus a few oversampling directions, then an exact
// factorization of the small core. Deterministic for a fixed input and
// recovers a at d = min(m, n), where the sketch spans the whole space.
inline std::pair<DenseMatrix, DenseMatrix> truncated_svd(const DenseMatrix& a, std::size_t d) {
    if (a.empty()) {
        throw ParameterError("truncated_svd: matrix must be nonempty");
    }
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (d < 1 || d > std::min(m, n)) {
        throw ParameterError("truncated_svd: d out of range");
    }

    const std::size_t ell = std::min(std::min(m, n), d + 8);
    std::vector<std::vector<double>> y_cols, v_cols;
    const detail::CoreSvd core = detail::core_svd(a.data().data(), m, n, ell, y_cols, v_cols);

    // u column k = Y * (core left column, sigma absorbed); v row k = (V * core right)ᵀ.
    std::vector<double> u_data(m * d, 0.0);
    std::vector<double> v_data(d * n, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t t = 0; t < ell; ++t) {
            const double cu = core.u_scaled[k][t];
            if (cu != 0.0) {
                for (std::size_t i = 0; i < m; ++i) u_data[i * d + k] += y_cols[t][i] * cu;
            }
            const double cv = core.v[k][t];
            if (cv != 0.0) {
                for (std::size_t j = 0; j < n; ++j) v_data[k * n + j] += v_cols[t][j] * cv;
            }
        }
    }
    return {DenseMatrix(m, d, std::move(u_data)), DenseMatrix(d, n, std::move(v_data))};
}

// Number of singular values above tol * sigma_max.
inline std::size_t numerical_rank(const DenseMatrix& a, double tol) {
    if (!(tol > 0.0)) {
        throw ParameterError("numerical_rank: tol must be positive");
    }
    if (a.empty()) return 0;

    const std::vector<double> sigma = detail::singular_spectrum(a);
    if (sigma.empty() || sigma.front() == 0.0) return 0;
    const double threshold = tol * sigma.front();
    std::size_t rank = 0;
    for (double s : sigma) {
        if (s > threshold) ++rank;
    }
    return rank;
}

} // namespace hmdc
