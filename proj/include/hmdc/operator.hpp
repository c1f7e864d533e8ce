#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>

#include "hmdc/csr.hpp"
#include "hmdc/dense.hpp"
#include "hmdc/error.hpp"
#include "hmdc/hmd.hpp"
#include "hmdc/lmf.hpp"

namespace hmdc {

enum class Scheme { Dense, Hmd, Lmf, Csr };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Dense: return "dense";
        case Scheme::Hmd: return "hmd";
        case Scheme::Lmf: return "lmf";
        case Scheme::Csr: return "csr";
    }
    return "?";
}

inline Scheme scheme_from_name(const std::string& name) {
    if (name == "dense") return Scheme::Dense;
    if (name == "hmd") return Scheme::Hmd;
    if (name == "lmf") return Scheme::Lmf;
    if (name == "csr") return Scheme::Csr;
    throw ParameterError("unknown scheme: " + name);
}

// A weight matrix in any of the four storage formats, with a uniform
// matvec/count/densify surface. param_count for CSR counts weights only;
// index overhead is reported separately via csr_param_count.
class WeightOperator {
public:
    WeightOperator(DenseMatrix m) : impl_(std::move(m)) {}
    WeightOperator(HmdMatrix m) : impl_(std::move(m)) {}
    WeightOperator(LmfMatrix m) : impl_(std::move(m)) {}
    WeightOperator(CsrMatrix m) : impl_(std::move(m)) {}

    Scheme kind() const {
        switch (impl_.index()) {
            case 0: return Scheme::Dense;
            case 1: return Scheme::Hmd;
            case 2: return Scheme::Lmf;
            default: return Scheme::Csr;
        }
    }

    std::size_t out_dim() const {
        return std::visit([](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) return m.rows();
            else return m.m();
        }, impl_);
    }

    std::size_t in_dim() const {
        return std::visit([](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) return m.cols();
            else return m.n();
        }, impl_);
    }

    RealVector matvec(const RealVector& x) const {
        return std::visit([&](const auto& m) -> RealVector {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) return dense_matvec(m, x);
            else if constexpr (std::is_same_v<T, HmdMatrix>) return hmd_matvec(m, x);
            else if constexpr (std::is_same_v<T, LmfMatrix>) return lmf_matvec(m, x);
            else return csr_matvec(m, x);
        }, impl_);
    }

    std::size_t param_count() const {
        return std::visit([](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) return m.rows() * m.cols();
            else if constexpr (std::is_same_v<T, HmdMatrix>) return hmd_param_count(m);
            else if constexpr (std::is_same_v<T, LmfMatrix>) return lmf_param_count(m);
            else return csr_param_count(m).weights;
        }, impl_);
    }

    std::size_t mac_count() const {
        return std::visit([](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) return m.rows() * m.cols();
            else if constexpr (std::is_same_v<T, HmdMatrix>) return hmd_mac_count(m);
            else if constexpr (std::is_same_v<T, LmfMatrix>) return lmf_mac_count(m);
            else return m.nnz();
        }, impl_);
    }

    // Explicit dense reconstruction; the cross-format oracle.
    DenseMatrix densify() const {
        return std::visit([](const auto& m) -> DenseMatrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) return m;
            else if constexpr (std::is_same_v<T, HmdMatrix>) return hmd_reconstruct(m);
            else if constexpr (std::is_same_v<T, LmfMatrix>) return lmf_reconstruct(m);
            else return csr_densify(m);
        }, impl_);
    }

    const std::variant<DenseMatrix, HmdMatrix, LmfMatrix, CsrMatrix>& value() const noexcept {
        return impl_;
    }

private:
    std::variant<DenseMatrix, HmdMatrix, LmfMatrix, CsrMatrix> impl_;
};

// Fit one dense matrix into the requested format at the given compression
// target, rank chosen by the scheme's planner. Dense passes through.
inline WeightOperator compress_dense(const DenseMatrix& a, Scheme scheme, double target) {
    switch (scheme) {
        case Scheme::Dense:
            return WeightOperator(a);
        case Scheme::Hmd:
            return WeightOperator(
                hmd_fit_from_dense(a, hmd_rank_for_compression(a.rows(), a.cols(), target)));
        case Scheme::Lmf:
            return WeightOperator(
                lmf_fit_from_dense(a, lmf_rank_for_compression(a.rows(), a.cols(), target)));
        case Scheme::Csr:
            return WeightOperator(prune_by_magnitude(a, target));
    }
    throw ParameterError("compress_dense: unknown scheme");
}

} // namespace hmdc
