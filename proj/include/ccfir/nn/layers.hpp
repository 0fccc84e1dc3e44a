#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ccfir/nn/tensor.hpp"

namespace ccfir::nn {

enum class Activation : std::uint8_t { Identity = 0, Tanh = 1 };

// One causal depthwise convolution layer: per-channel kernel, batch-norm
// scale (no shift), then the activation. Channels never mix here.
struct DepthwiseLayer {
    Eigen::MatrixXd kernels;       // L x p; kernels(c, 0) weights the current sample
    Eigen::VectorXd gamma;         // L
    Eigen::VectorXd running_mean;  // L
    Eigen::VectorXd running_var;   // L
    Activation activation = Activation::Tanh;
};

// expansion (pointwise) -> M depthwise layers -> projection (pointwise).
// No additive biases anywhere.
struct LayerStack {
    Eigen::MatrixXd expansion;   // L x Cin
    std::vector<DepthwiseLayer> layers;
    Eigen::MatrixXd projection;  // N x L
    bool training = true;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    std::size_t channels() const { return static_cast<std::size_t>(expansion.rows()); }
    std::size_t inputs() const { return static_cast<std::size_t>(expansion.cols()); }
    std::size_t outputs() const { return static_cast<std::size_t>(projection.rows()); }
    std::size_t kernel_len() const {
        return layers.empty() ? 0 : static_cast<std::size_t>(layers[0].kernels.cols());
    }
};

LayerStack make_stack(std::size_t inputs, std::size_t channels, std::size_t outputs,
                      std::size_t n_layers, std::size_t kernel_len,
                      Activation activation, std::uint64_t seed);

struct LayerCache {
    Tensor3 input;       // what the convolution saw
    Tensor3 pre_bn;      // convolution output
    Tensor3 normalized;  // (z - mean)/sqrt(var + eps)
    Tensor3 output;      // after gamma scaling and activation
    Eigen::VectorXd mean, var;  // statistics used (batch or running)
};

struct ForwardCache {
    Tensor3 input;
    Tensor3 expanded;
    std::vector<LayerCache> layers;
    bool train_mode = false;
};

struct LayerGrad {
    Eigen::MatrixXd kernels;
    Eigen::VectorXd gamma;
};

struct StackGrad {
    Eigen::MatrixXd expansion;
    std::vector<LayerGrad> layers;
    Eigen::MatrixXd projection;
    Tensor3 input;  // gradient w.r.t. the stack input
};

// Causal forward pass; updates batch-norm running stats in training mode.
Tensor3 forward(LayerStack& stack, const Tensor3& batch, ForwardCache& cache);
Tensor3 forward(const LayerStack& stack, const Tensor3& batch);  // eval, no side effects

StackGrad backward(const LayerStack& stack, const ForwardCache& cache,
                   const Tensor3& output_grad);

// Seeded Xavier-uniform draws in +-sqrt(6/(fan_in + fan_out)).
Eigen::MatrixXd xavier_init(std::size_t fan_in, std::size_t fan_out,
                            std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace ccfir::nn
