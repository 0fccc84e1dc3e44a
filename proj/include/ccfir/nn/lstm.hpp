#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ccfir/nn/tensor.hpp"

namespace ccfir::nn {

struct LstmLayerParams {
    Eigen::MatrixXd w_ih;  // 4H x input, gate order i, f, g, o
    Eigen::MatrixXd w_hh;  // 4H x H
    Eigen::VectorXd bias;  // 4H
};

// 2-layer LSTM with dropout between layers (train mode only), plus linear
// heads emitting mu and logvar per time step. logvar is clamped to [-20, 20].
struct LstmEncoder {
    std::vector<LstmLayerParams> layers;
    Eigen::MatrixXd head_mu, head_logvar;      // L x H
    Eigen::VectorXd head_mu_b, head_logvar_b;  // L
    double dropout = 0.2;
    bool training = true;

    std::size_t hidden() const {
        return layers.empty() ? 0 : static_cast<std::size_t>(layers[0].w_hh.cols());
    }
    std::size_t latent() const { return static_cast<std::size_t>(head_mu.rows()); }
    std::size_t inputs() const {
        return layers.empty() ? 0 : static_cast<std::size_t>(layers[0].w_ih.cols());
    }
};

LstmEncoder make_lstm_encoder(std::size_t inputs, std::size_t hidden, std::size_t latent,
                              std::uint64_t seed);

struct LstmCache {
    Tensor3 input;
    // per layer: inputs after dropout, gate activations and states per step
    struct Layer {
        Tensor3 input;              // B x in x T (after dropout of previous layer)
        Tensor3 gate_i, gate_f, gate_g, gate_o;  // B x H x T, post-nonlinearity
        Tensor3 cell, cell_tanh, hidden;         // B x H x T
        Tensor3 dropout_mask;  // mask applied to this layer's *output* (empty if none)
    };
    std::vector<Layer> layers;
    Tensor3 top_hidden;  // input of the heads
    Tensor3 logvar_raw;  // before clamping
    bool train_mode = false;
};

// Returns (mu, logvar), both B x L x T.
std::pair<Tensor3, Tensor3> lstm_forward(const LstmEncoder& enc, const Tensor3& batch,
                                         LstmCache& cache, std::uint64_t dropout_seed = 0);

struct LstmGrad {
    std::vector<LstmLayerParams> layers;  // same shapes as the parameters
    Eigen::MatrixXd head_mu, head_logvar;
    Eigen::VectorXd head_mu_b, head_logvar_b;
};

LstmGrad lstm_backward(const LstmEncoder& enc, const LstmCache& cache,
                       const Tensor3& dmu, const Tensor3& dlogvar);

}  // namespace ccfir::nn
