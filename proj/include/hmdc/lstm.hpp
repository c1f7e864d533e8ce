#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "hmdc/error.hpp"
#include "hmdc/operator.hpp"

namespace hmdc {

struct LstmState {
    RealVector h;
    RealVector c;
};

// LSTM cell over pluggable weight operators. Both weight matrices use the
// fused 4h-row layout with gate order i, f, g, o; the operators may be any
// WeightOperator kind, so a compressed cell and its densified twin share
// this one implementation.
class LstmCell {
public:
    LstmCell(std::size_t input_dim, std::size_t hidden_dim,
             WeightOperator w_x, WeightOperator w_h, RealVector bias)
        : input_dim_(input_dim), hidden_dim_(hidden_dim),
          w_x_(std::move(w_x)), w_h_(std::move(w_h)), bias_(std::move(bias)) {
        if (hidden_dim_ < 1 || input_dim_ < 1) {
            throw ParameterError("LstmCell: dims must be >= 1");
        }
        if (w_x_.out_dim() != 4 * hidden_dim_ || w_x_.in_dim() != input_dim_) {
            throw ShapeError("LstmCell: w_x must be 4*hidden x input");
        }
        if (w_h_.out_dim() != 4 * hidden_dim_ || w_h_.in_dim() != hidden_dim_) {
            throw ShapeError("LstmCell: w_h must be 4*hidden x hidden");
        }
        if (bias_.len() != 4 * hidden_dim_) {
            throw ShapeError("LstmCell: bias must have length 4*hidden");
        }
    }

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t hidden_dim() const noexcept { return hidden_dim_; }
    const WeightOperator& w_x() const noexcept { return w_x_; }
    const WeightOperator& w_h() const noexcept { return w_h_; }
    const RealVector& bias() const noexcept { return bias_; }

private:
    std::size_t input_dim_;
    std::size_t hidden_dim_;
    WeightOperator w_x_;
    WeightOperator w_h_;
    RealVector bias_;
};

inline LstmState lstm_zero_state(const LstmCell& cell) {
    return LstmState{RealVector(cell.hidden_dim()), RealVector(cell.hidden_dim())};
}

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace detail

// One step: z = w_x·x + w_h·h + bias; i,f,o through the logistic, g through
// tanh; c' = f⊙c + i⊙g; h' = o⊙tanh(c').
inline LstmState lstm_step(const LstmCell& cell, const RealVector& x_t, const LstmState& state) {
    if (x_t.len() != cell.input_dim()) {
        throw ShapeError("lstm_step: x_t.len != input_dim");
    }
    if (state.h.len() != cell.hidden_dim() || state.c.len() != cell.hidden_dim()) {
        throw ShapeError("lstm_step: state dims != hidden_dim");
    }
    const std::size_t hd = cell.hidden_dim();

    const RealVector zx = cell.w_x().matvec(x_t);
    const RealVector zh = cell.w_h().matvec(state.h);

    std::vector<double> h_next(hd, 0.0);
    std::vector<double> c_next(hd, 0.0);
    for (std::size_t j = 0; j < hd; ++j) {
        const double zi = zx[j] + zh[j] + cell.bias()[j];
        const double zf = zx[hd + j] + zh[hd + j] + cell.bias()[hd + j];
        const double zg = zx[2 * hd + j] + zh[2 * hd + j] + cell.bias()[2 * hd + j];
        const double zo = zx[3 * hd + j] + zh[3 * hd + j] + cell.bias()[3 * hd + j];

        const double i = detail::sigmoid(zi);
        const double f = detail::sigmoid(zf);
        const double g = std::tanh(zg);
        const double o = detail::sigmoid(zo);

        const double c = f * state.c[j] + i * g;
        c_next[j] = c;
        h_next[j] = o * std::tanh(c);
    }
    return LstmState{RealVector(std::move(h_next)), RealVector(std::move(c_next))};
}

// Fold of lstm_step over the sequence, returning every intermediate state.
inline std::vector<LstmState> lstm_forward(const LstmCell& cell,
                                           const std::vector<RealVector>& sequence,
                                           const LstmState& init) {
    std::vector<LstmState> states;
    states.reserve(sequence.size());
    const LstmState* prev = &init;
    for (const RealVector& x_t : sequence) {
        states.push_back(lstm_step(cell, x_t, *prev));
        prev = &states.back();
    }
    return states;
}

// Re-fit both weight matrices of a dense cell into the requested format,
// each at its own planner-chosen rank/sparsity; biases pass through.
inline LstmCell compress_cell(const LstmCell& cell, Scheme scheme, double target) {
    if (cell.w_x().kind() != Scheme::Dense || cell.w_h().kind() != Scheme::Dense) {
        throw ParameterError("compress_cell: cell operators must be dense");
    }
    const DenseMatrix& wx = std::get<DenseMatrix>(cell.w_x().value());
    const DenseMatrix& wh = std::get<DenseMatrix>(cell.w_h().value());
    return LstmCell(cell.input_dim(), cell.hidden_dim(),
                    compress_dense(wx, scheme, target),
                    compress_dense(wh, scheme, target),
                    cell.bias());
}

struct CellParamCount {
    std::size_t weight_params = 0;
    std::size_t bias_params = 0;
    std::size_t total() const noexcept { return weight_params + bias_params; }
};

inline CellParamCount cell_param_count(const LstmCell& cell) {
    CellParamCount c;
    c.weight_params = cell.w_x().param_count() + cell.w_h().param_count();
    c.bias_params = cell.bias().len();
    return c;
}

// Per-step cost: the two operator matvecs plus the elementwise tail, the
// latter reported separately (4h bias adds, 5h activations, 3h cell-state
// ops, h output products = 13h scalar ops per step).
struct CellMacCount {
    std::size_t matvec_macs = 0;
    std::size_t elementwise_ops = 0;
};

inline CellMacCount cell_mac_count(const LstmCell& cell, std::size_t seq_len) {
    CellMacCount c;
    c.matvec_macs = seq_len * (cell.w_x().mac_count() + cell.w_h().mac_count());
    c.elementwise_ops = seq_len * 13 * cell.hidden_dim();
    return c;
}

} // namespace hmdc
