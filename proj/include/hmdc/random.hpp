#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hmdc/dense.hpp"

namespace hmdc {

// Seeded uniform doubles in [lo, hi). mt19937_64 output is pinned by the
// standard and the mapping below avoids std::uniform_real_distribution,
// whose output is implementation-defined, so the same seed yields the same
// matrix on every platform.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    std::uint64_t next_u64() { return gen_(); }

    std::vector<double> uniform_vector(std::size_t count, double lo = -1.0, double hi = 1.0) {
        std::vector<double> out(count);
        for (double& v : out) {
            v = uniform(lo, hi);
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

inline DenseMatrix random_dense(std::size_t m, std::size_t n, std::uint64_t seed) {
    SeededRng rng(seed);
    return DenseMatrix(m, n, rng.uniform_vector(m * n));
}

inline RealVector random_vector(std::size_t len, std::uint64_t seed) {
    SeededRng rng(seed);
    return RealVector(rng.uniform_vector(len));
}

} // namespace hmdc
