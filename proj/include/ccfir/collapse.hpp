#pragma once

#include <string>
#include <vector>

#include "ccfir/fir.hpp"
#include "ccfir/nn/layers.hpp"

namespace ccfir {

// The stack folded into equivalent FIR filters: one per latent channel
// (depthwise chain with batch-norm scales absorbed) and one per
// (input, output) pair including the pointwise maps.
struct CollapsedFilter {
    std::vector<std::vector<double>> per_channel;  // L x (M(p-1)+1)
    std::vector<std::vector<std::vector<double>>> end_to_end;  // [out][in] -> taps
    // Constant offsets contributed by the batch-norm mean subtraction: the
    // frozen network is affine, y = W * x + offset. Exact for the identity
    // activation, operating-point approximation for tanh.
    std::vector<double> per_channel_offset;  // L
    std::vector<double> end_to_end_offset;   // per output
    double fs = 1.0;
};

struct LinearityReport {
    std::vector<double> r2;  // per layer
    std::vector<bool> degenerate;  // SS_tot == 0
    double mean_r2 = 0.0;
};

// Kernel with gamma / sqrt(running_var + eps) absorbed. Warns (returns false
// in *mean_ok) when |running_mean| is large enough to break FIR equivalence.
std::vector<double> fold_batchnorm(const nn::DepthwiseLayer& layer, double bn_eps,
                                   std::size_t channel, bool* mean_ok = nullptr);

CollapsedFilter collapse_stack(const nn::LayerStack& stack, double fs = 1.0);

LinearityReport linearity_r2(nn::LayerStack& stack, const nn::Tensor3& batch);

// ||W - reverse(W)||^2 and its gradient.
std::pair<double, std::vector<double>> symmetry_loss(const std::vector<double>& w);

// Symmetry loss evaluated on the per-channel product filter of the raw
// kernels, with exact gradients chained through the repeated convolution.
struct SymmetryThroughStack {
    double value = 0.0;
    std::vector<Eigen::MatrixXd> kernel_grads;  // per layer, L x p
};
SymmetryThroughStack symmetry_loss_through_stack(const nn::LayerStack& stack);

// convolution of two tap vectors
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);

void write_linearity_csv(const std::string& path, const LinearityReport& report);

}  // namespace ccfir
