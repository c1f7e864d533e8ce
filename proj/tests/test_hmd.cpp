#include <doctest.h>

#include "hmdc/hmdc.hpp"
#include "oracle.hpp"

using namespace hmdc;

namespace {

// The worked 4x4 example used throughout: m=4, n=4, r=2.
HmdMatrix worked_example() {
    return HmdMatrix(4, 4, 2,
                     DenseMatrix(2, 4, {1, 0, 0, 0, 0, 1, 0, 0}),
                     RealVector(std::vector<double>{1, 1}),
                     RealVector(std::vector<double>{1, 1}),
                     RealVector(std::vector<double>{2, 2}),
                     RealVector(std::vector<double>{1, 0}));
}

double fro_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace

TEST_CASE("HmdMatrix validates its invariants") {
    CHECK_THROWS_AS(oracle::random_hmd(4, 1, 2, 1), ParameterError);  // n < 2
    CHECK_THROWS_AS(oracle::random_hmd(4, 4, 4, 1), ParameterError);  // r == m
    CHECK_NOTHROW(oracle::random_hmd(4, 4, 0, 1));                    // r == 0 is legal
    CHECK_NOTHROW(oracle::random_hmd(5, 7, 3, 1));                    // odd n

    // Wrong c/e split for odd n.
    CHECK_THROWS_AS(HmdMatrix(3, 5, 1, DenseMatrix(1, 5), RealVector(2), RealVector(2),
                              RealVector(2), RealVector(2)),
                    ShapeError);
    CHECK_THROWS_AS(HmdMatrix(3, 4, 1, DenseMatrix(1, 4), RealVector(1), RealVector(2),
                              RealVector(2), RealVector(2)),
                    ShapeError);
}

TEST_CASE("hmd_reconstruct expands the worked example") {
    const DenseMatrix a = hmd_reconstruct(worked_example());
    const std::vector<double> expected{1, 0, 0, 0, 0, 1, 0, 0, 1, 1, 2, 0, 1, 1, 2, 0};
    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 4);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(a.data()[i] == expected[i]);
    }
}

TEST_CASE("hmd_reconstruct with zero b and d leaves the bottom rows zero") {
    const HmdMatrix h(4, 4, 1, DenseMatrix(1, 4, {1, 2, 3, 4}), RealVector(3),
                      RealVector(std::vector<double>{1, 1}), RealVector(3),
                      RealVector(std::vector<double>{1, 1}));
    const DenseMatrix a = hmd_reconstruct(h);
    for (std::size_t i = 1; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) CHECK(a(i, j) == 0.0);
    }
}

TEST_CASE("reconstructed bottom blocks are rank 1 by construction") {
    const HmdMatrix h = oracle::random_hmd(12, 11, 5, 201);
    const DenseMatrix a = hmd_reconstruct(h);
    const std::size_t nl = h.left_cols();
    const std::size_t mb = h.m() - h.r();

    std::vector<double> left(mb * nl), right(mb * (h.n() - nl));
    for (std::size_t i = 0; i < mb; ++i) {
        for (std::size_t j = 0; j < nl; ++j) left[i * nl + j] = a(h.r() + i, j);
        for (std::size_t j = nl; j < h.n(); ++j) {
            right[i * (h.n() - nl) + (j - nl)] = a(h.r() + i, j);
        }
    }
    const auto sv_left = oracle::singular_values(DenseMatrix(mb, nl, std::move(left)));
    const auto sv_right =
        oracle::singular_values(DenseMatrix(mb, h.n() - nl, std::move(right)));
    CHECK(oracle::sigma_tail_sq(sv_left, 1) <= 1e-20 * sv_left.front() * sv_left.front());
    CHECK(oracle::sigma_tail_sq(sv_right, 1) <= 1e-20 * sv_right.front() * sv_right.front());
}

TEST_CASE("hmd_matvec reproduces the worked example") {
    const RealVector y = hmd_matvec(worked_example(), RealVector(std::vector<double>{1, 2, 3, 4}));
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 2.0);
    CHECK(y[2] == 9.0);
    CHECK(y[3] == 9.0);
}

TEST_CASE("hmd_matvec of the zero vector is zero") {
    const HmdMatrix h = oracle::random_hmd(9, 7, 4, 202);
    const RealVector y = hmd_matvec(h, RealVector(7));
    for (std::size_t i = 0; i < 9; ++i) CHECK(y[i] == 0.0);
}

TEST_CASE("hmd_matvec rejects mismatched input length") {
    CHECK_THROWS_AS(hmd_matvec(worked_example(), RealVector(3)), ShapeError);
}

TEST_CASE("hmd_matvec agrees with the dense oracle over random instances") {
    SeededRng rng(203);
    for (int trial = 0; trial < 100; ++trial) {
        const oracle::HmdShape s = oracle::random_hmd_shape(rng, 40, trial % 2 == 0);
        const HmdMatrix h = oracle::random_hmd(s.m, s.n, s.r, rng.next_u64());
        const RealVector x(rng.uniform_vector(s.n));
        const DenseMatrix a = hmd_reconstruct(h);
        const double tol =
            1e-12 * static_cast<double>(s.n) * std::max(1.0, oracle::max_abs_entry(a));
        CHECK(oracle::max_abs_diff(hmd_matvec(h, x), dense_matvec(a, x)) < tol);
    }
}

TEST_CASE("hmd_matvec is linear in x") {
    SeededRng rng(204);
    for (int trial = 0; trial < 30; ++trial) {
        const oracle::HmdShape s = oracle::random_hmd_shape(rng, 24, trial % 2 == 0);
        const HmdMatrix h = oracle::random_hmd(s.m, s.n, s.r, rng.next_u64());
        const RealVector x(rng.uniform_vector(s.n));
        const RealVector y(rng.uniform_vector(s.n));
        const double alpha = rng.uniform(-2, 2);
        const double beta = rng.uniform(-2, 2);

        std::vector<double> combo(s.n);
        for (std::size_t j = 0; j < s.n; ++j) combo[j] = alpha * x[j] + beta * y[j];
        const RealVector lhs = hmd_matvec(h, RealVector(std::move(combo)));
        const RealVector hx = hmd_matvec(h, x);
        const RealVector hy = hmd_matvec(h, y);
        for (std::size_t i = 0; i < s.m; ++i) {
            const double rhs = alpha * hx[i] + beta * hy[i];
            const double scale = std::max(1.0, std::abs(alpha * hx[i]) + std::abs(beta * hy[i]));
            CHECK(std::abs(lhs[i] - rhs) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("hmd_param_count") {
    CHECK(hmd_param_count(256, 256, 128) == 33280);
    CHECK(hmd_param_count(4, 4, 0) == 12);

    SeededRng rng(205);
    for (int trial = 0; trial < 20; ++trial) {
        const oracle::HmdShape s = oracle::random_hmd_shape(rng, 32, trial % 2 == 0);
        const HmdMatrix h = oracle::random_hmd(s.m, s.n, s.r, rng.next_u64());
        const std::size_t stored = h.a_prime().data().size() + h.b().len() + h.c().len() +
                                   h.d().len() + h.e().len();
        CHECK(hmd_param_count(h) == stored);
    }
}

TEST_CASE("hmd_storage_ratio") {
    CHECK(hmd_storage_ratio(256, 256, 128) ==
          doctest::Approx(65536.0 / 33280.0).epsilon(1e-12));
    CHECK(hmd_storage_ratio(256, 256, 125) ==
          doctest::Approx(65536.0 / 32518.0).epsilon(1e-12));
    CHECK_THROWS_AS(hmd_storage_ratio(4, 4, 4), ParameterError);
    CHECK_THROWS_AS(hmd_storage_ratio(4, 1, 0), ParameterError);
}

TEST_CASE("hmd_storage_ratio strictly decreases in r for n > 2") {
    for (std::size_t n : {3u, 8u, 17u}) {
        double prev = hmd_storage_ratio(20, n, 0);
        for (std::size_t r = 1; r < 20; ++r) {
            const double cur = hmd_storage_ratio(20, n, r);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    // n == 2 is the degenerate flat case: every r stores 2m + 2 values.
    CHECK(hmd_storage_ratio(20, 2, 0) == hmd_storage_ratio(20, 2, 19));
}

TEST_CASE("hmd_mac_count") {
    CHECK(hmd_mac_count(256, 256, 128) == 33408);
    CHECK(65536.0 / static_cast<double>(hmd_mac_count(256, 256, 128)) ==
          doctest::Approx(1.9617).epsilon(1e-4));
    CHECK(hmd_mac_count(2, 2, 0) == 8);
}

TEST_CASE("hmd_mac_count equals the instrumented op count") {
    SeededRng rng(206);
    for (int trial = 0; trial < 50; ++trial) {
        const oracle::HmdShape s = oracle::random_hmd_shape(rng, 32, trial % 2 == 0);
        const HmdMatrix h = oracle::random_hmd(s.m, s.n, s.r, rng.next_u64());
        const auto counted = oracle::hmd_matvec_instrumented(h, rng.uniform_vector(s.n));
        CHECK(counted.ops == hmd_mac_count(h));
    }
}

TEST_CASE("hmd_rank_for_compression solves the parameter budget") {
    CHECK(hmd_rank_for_compression(256, 256, 2.0) == 125);
    CHECK(hmd_param_count(256, 256, 125) == 32518);
    CHECK(hmd_param_count(256, 256, 126) == 32772);
    CHECK_THROWS_AS(hmd_rank_for_compression(4, 4, 100.0), InfeasibleError);
    CHECK_THROWS_AS(hmd_rank_for_compression(4, 4, 1.0), ParameterError);

    // Near-unity target: the largest r whose parameter count fits the
    // budget is 254; r = 255 would store 65538 > 65536/1.0001 values and
    // miss the target.
    const std::size_t r = hmd_rank_for_compression(256, 256, 1.0001);
    CHECK(r == 254);
    CHECK(static_cast<double>(hmd_param_count(256, 256, r)) <= 65536.0 / 1.0001);
    CHECK(static_cast<double>(hmd_param_count(256, 256, r + 1)) > 65536.0 / 1.0001);
    CHECK(hmd_storage_ratio(256, 256, r) >= 1.0001);
}

TEST_CASE("hmd_rank_for_compression achieves at least the target") {
    SeededRng rng(207);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = 4 + rng.next_u64() % 200;
        const std::size_t n = 2 + rng.next_u64() % 200;
        const double target = 1.0 + rng.uniform(0.01, 8.0);
        try {
            const std::size_t r = hmd_rank_for_compression(m, n, target);
            CHECK(hmd_storage_ratio(m, n, r) >= target);
            if (r + 1 < m) {
                CHECK(static_cast<double>(hmd_param_count(m, n, r + 1)) >
                      static_cast<double>(m * n) / target);
            }
        } catch (const InfeasibleError&) {
            CHECK(static_cast<double>(hmd_param_count(m, n, 0)) >
                  static_cast<double>(m * n) / target);
        }
    }
}

TEST_CASE("hmd_fit_from_dense is idempotent on in-model input") {
    const HmdMatrix h = oracle::random_hmd(10, 9, 4, 208);
    const DenseMatrix a = hmd_reconstruct(h);
    const DenseMatrix back = hmd_reconstruct(hmd_fit_from_dense(a, 4));
    CHECK(fro_diff(a, back) < 1e-9 * frobenius_norm(a));
}

TEST_CASE("hmd_fit_from_dense at r = m-1 is bounded by the last row's norm") {
    const DenseMatrix a = random_dense(6, 8, 209);
    const DenseMatrix back = hmd_reconstruct(hmd_fit_from_dense(a, 5));
    double row_norm_sq = 0.0;
    for (std::size_t j = 0; j < 8; ++j) row_norm_sq += a(5, j) * a(5, j);
    CHECK(fro_diff(a, back) <= std::sqrt(row_norm_sq) * (1.0 + 1e-12));
    // Top rows are copied verbatim.
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 8; ++j) CHECK(back(i, j) == a(i, j));
    }
}

TEST_CASE("hmd_fit_from_dense residual equals the block sigma tails") {
    const DenseMatrix a = random_dense(16, 16, 210);
    const std::size_t r = 8;
    const DenseMatrix back = hmd_reconstruct(hmd_fit_from_dense(a, r));
    const double res_sq = fro_diff(a, back) * fro_diff(a, back);

    const std::size_t nl = 8, mb = 8;
    std::vector<double> left(mb * nl), right(mb * nl);
    for (std::size_t i = 0; i < mb; ++i) {
        for (std::size_t j = 0; j < nl; ++j) {
            left[i * nl + j] = a(r + i, j);
            right[i * nl + j] = a(r + i, nl + j);
        }
    }
    const double tails =
        oracle::sigma_tail_sq(oracle::singular_values(DenseMatrix(mb, nl, std::move(left))), 1) +
        oracle::sigma_tail_sq(oracle::singular_values(DenseMatrix(mb, nl, std::move(right))), 1);
    CHECK(std::abs(res_sq - tails) <= 1e-7 * tails);
}

TEST_CASE("hmd_fit_from_dense rejects bad shapes") {
    const DenseMatrix a = random_dense(4, 4, 211);
    CHECK_THROWS_AS(hmd_fit_from_dense(a, 4), ParameterError);
    CHECK_THROWS_AS(hmd_fit_from_dense(random_dense(4, 1, 212), 1), ParameterError);
}

TEST_CASE("fitted factors are canonical but scaled factors load fine") {
    const DenseMatrix a = random_dense(8, 8, 213);
    const HmdMatrix h = hmd_fit_from_dense(a, 3);
    double cn = 0.0, en = 0.0;
    for (std::size_t j = 0; j < h.c().len(); ++j) cn += h.c()[j] * h.c()[j];
    for (std::size_t j = 0; j < h.e().len(); ++j) en += h.e()[j] * h.e()[j];
    CHECK(std::abs(std::sqrt(cn) - 1.0) < 1e-12);
    CHECK(std::abs(std::sqrt(en) - 1.0) < 1e-12);

    // Rescaled factors represent the same matrix and are accepted.
    std::vector<double> b2 = h.b().data(), c2 = h.c().data();
    for (double& x : b2) x *= 4.0;
    for (double& x : c2) x /= 4.0;
    const HmdMatrix scaled(8, 8, 3, h.a_prime(), RealVector(std::move(b2)),
                           RealVector(std::move(c2)), h.d(), h.e());
    CHECK(fro_diff(hmd_reconstruct(scaled), hmd_reconstruct(h)) < 1e-12);
}
