#include <doctest.h>

#include "hmdc/hmdc.hpp"
#include "oracle.hpp"

using namespace hmdc;

namespace {

LstmCell random_dense_cell(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
    return LstmCell(input_dim, hidden_dim,
                    WeightOperator(random_dense(4 * hidden_dim, input_dim, seed)),
                    WeightOperator(random_dense(4 * hidden_dim, hidden_dim, seed + 1)),
                    random_vector(4 * hidden_dim, seed + 2));
}

LstmCell densified_twin(const LstmCell& cell) {
    return LstmCell(cell.input_dim(), cell.hidden_dim(),
                    WeightOperator(cell.w_x().densify()),
                    WeightOperator(cell.w_h().densify()), cell.bias());
}

std::vector<RealVector> random_sequence(std::size_t len, std::size_t dim, std::uint64_t seed) {
    std::vector<RealVector> seq;
    seq.reserve(len);
    for (std::size_t t = 0; t < len; ++t) seq.push_back(random_vector(dim, seed + t));
    return seq;
}

} // namespace

TEST_CASE("WeightOperator matvec agrees with its dense reconstruction for every kind") {
    const DenseMatrix a = random_dense(20, 14, 501);
    for (Scheme scheme : {Scheme::Dense, Scheme::Hmd, Scheme::Lmf, Scheme::Csr}) {
        const WeightOperator op = compress_dense(a, scheme, scheme == Scheme::Dense ? 1.0 : 2.0);
        CHECK(op.kind() == scheme);
        CHECK(op.out_dim() == 20);
        CHECK(op.in_dim() == 14);
        const DenseMatrix dense = op.densify();
        for (int trial = 0; trial < 4; ++trial) {
            const RealVector x = random_vector(14, 502 + trial);
            const double tol = 1e-12 * 14 * std::max(1.0, oracle::max_abs_entry(dense));
            CHECK(oracle::max_abs_diff(op.matvec(x), dense_matvec(dense, x)) < tol);
        }
        if (scheme != Scheme::Dense) {
            CHECK(op.param_count() * 2 <= 20 * 14 + op.param_count());
        }
    }
}

TEST_CASE("LstmCell validates operator shapes") {
    CHECK_THROWS_AS(LstmCell(4, 3, WeightOperator(DenseMatrix(12, 5)),
                             WeightOperator(DenseMatrix(12, 3)), RealVector(12)),
                    ShapeError);
    CHECK_THROWS_AS(LstmCell(4, 3, WeightOperator(DenseMatrix(12, 4)),
                             WeightOperator(DenseMatrix(12, 3)), RealVector(11)),
                    ShapeError);
    CHECK_NOTHROW(random_dense_cell(4, 3, 503));
}

TEST_CASE("lstm_step with all-zero weights and biases") {
    const std::size_t hd = 3;
    const LstmCell cell(2, hd, WeightOperator(DenseMatrix(4 * hd, 2)),
                        WeightOperator(DenseMatrix(4 * hd, hd)), RealVector(4 * hd));
    const std::vector<double> c0{0.8, -0.3, 1.7};
    const LstmState state{RealVector(std::vector<double>{0.2, -0.1, 0.4}),
                          RealVector(std::vector<double>(c0))};
    const LstmState next = lstm_step(cell, RealVector(std::vector<double>{5.0, -2.0}), state);
    for (std::size_t j = 0; j < hd; ++j) {
        // sigmoid(0) = 0.5 and tanh(0) = 0, so c' = 0.5 c and h' = 0.5 tanh(0.5 c).
        CHECK(next.c[j] == 0.5 * c0[j]);
        CHECK(next.h[j] == 0.5 * std::tanh(0.5 * c0[j]));
    }
}

TEST_CASE("saturated forget gate carries the cell state") {
    const std::size_t hd = 2;
    std::vector<double> bias(4 * hd, 0.0);
    bias[hd] = 50.0; // forget-gate lane
    bias[hd + 1] = 50.0;
    const LstmCell cell(2, hd, WeightOperator(DenseMatrix(4 * hd, 2)),
                        WeightOperator(DenseMatrix(4 * hd, hd)),
                        RealVector(std::move(bias)));
    const std::vector<double> c0{0.7, -1.1};
    const LstmState state{RealVector(hd), RealVector(std::vector<double>(c0))};
    const LstmState next = lstm_step(cell, RealVector(2), state);
    for (std::size_t j = 0; j < hd; ++j) {
        CHECK(std::abs(next.c[j] - c0[j]) < 1e-12);
    }
}

TEST_CASE("lstm_forward folds lstm_step") {
    const LstmCell cell = random_dense_cell(5, 4, 504);
    const LstmState init = lstm_zero_state(cell);

    CHECK(lstm_forward(cell, {}, init).empty());

    const auto seq = random_sequence(1, 5, 505);
    const auto states = lstm_forward(cell, seq, init);
    REQUIRE(states.size() == 1);
    const LstmState single = lstm_step(cell, seq[0], init);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(states[0].h[j] == single.h[j]);
        CHECK(states[0].c[j] == single.c[j]);
    }

    CHECK_THROWS_AS(lstm_step(cell, RealVector(3), init), ShapeError);
}

TEST_CASE("compressed cells track their densified twins step by step") {
    const LstmCell dense_cell = random_dense_cell(11, 13, 506);
    const auto seq = random_sequence(23, 11, 507);
    const LstmState init = lstm_zero_state(dense_cell);

    for (Scheme scheme : {Scheme::Hmd, Scheme::Lmf, Scheme::Csr}) {
        const LstmCell cell = compress_cell(dense_cell, scheme, 2.0);
        const LstmCell twin = densified_twin(cell);
        const auto fast = lstm_forward(cell, seq, init);
        const auto ref = lstm_forward(twin, seq, init);
        REQUIRE(fast.size() == ref.size());
        for (std::size_t t = 0; t < fast.size(); ++t) {
            for (std::size_t j = 0; j < 13; ++j) {
                CHECK(std::abs(fast[t].h[j] - ref[t].h[j]) < 1e-10);
                CHECK(std::abs(fast[t].c[j] - ref[t].c[j]) < 1e-10);
            }
        }
    }
}

TEST_CASE("csr compression at target 1 reproduces the forward pass exactly") {
    const LstmCell dense_cell = random_dense_cell(6, 5, 508);
    const LstmCell cell = compress_cell(dense_cell, Scheme::Csr, 1.0);
    const auto seq = random_sequence(5, 6, 509);
    const auto fast = lstm_forward(cell, seq, lstm_zero_state(cell));
    const auto ref = lstm_forward(dense_cell, seq, lstm_zero_state(dense_cell));
    for (std::size_t t = 0; t < 5; ++t) {
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(fast[t].h[j] == ref[t].h[j]);
            CHECK(fast[t].c[j] == ref[t].c[j]);
        }
    }
}

TEST_CASE("compress_cell plans per matrix and hits the target") {
    const LstmCell dense_cell = random_dense_cell(200, 200, 510);

    const LstmCell hmd_cell = compress_cell(dense_cell, Scheme::Hmd, 2.0);
    const std::size_t r = hmd_rank_for_compression(800, 200, 2.0);
    CHECK(std::get<HmdMatrix>(hmd_cell.w_h().value()).r() == r);
    CHECK(hmd_storage_ratio(800, 200, r) >= 2.0);

    const LstmCell lmf_cell = compress_cell(dense_cell, Scheme::Lmf, 5.0);
    CHECK(std::get<LmfMatrix>(lmf_cell.w_h().value()).d() == 32);

    CHECK_THROWS_AS(compress_cell(dense_cell, Scheme::Hmd, 1e9), InfeasibleError);
    CHECK_THROWS_AS(compress_cell(hmd_cell, Scheme::Lmf, 2.0), ParameterError);
}

TEST_CASE("cell parameter accounting") {
    const LstmCell cell = random_dense_cell(200, 200, 511);
    const CellParamCount params = cell_param_count(cell);
    CHECK(params.weight_params == 320000);
    CHECK(params.bias_params == 800);
    CHECK(params.total() == 320800);

    for (Scheme scheme : {Scheme::Hmd, Scheme::Lmf, Scheme::Csr}) {
        const LstmCell compressed = compress_cell(cell, scheme, 2.0);
        CHECK(cell_param_count(compressed).weight_params <= 160000);
        CHECK(cell_param_count(compressed).bias_params == 800);
    }
}

TEST_CASE("cell mac accounting") {
    const LstmCell cell = random_dense_cell(7, 6, 512);
    CHECK(cell_mac_count(cell, 0).matvec_macs == 0);
    CHECK(cell_mac_count(cell, 0).elementwise_ops == 0);
    const CellMacCount macs = cell_mac_count(cell, 3);
    CHECK(macs.matvec_macs == 3 * (cell.w_x().mac_count() + cell.w_h().mac_count()));
    CHECK(macs.elementwise_ops == 3 * 13 * 6);
}

TEST_CASE("hidden state stays inside (-1, 1) and finite under long random runs") {
    SeededRng rng(513);
    const LstmCell cell = random_dense_cell(6, 8, 514);
    LstmState state = lstm_zero_state(cell);
    for (int step = 0; step < 10'000; ++step) {
        state = lstm_step(cell, RealVector(rng.uniform_vector(6)), state);
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(std::isfinite(state.c[j]));
            CHECK(state.h[j] > -1.0);
            CHECK(state.h[j] < 1.0);
        }
    }
}
