#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccfir/nn/layers.hpp"
#include "ccfir/nn/lstm.hpp"

namespace ccfir::nn {

struct TrainingConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
    double lr_start = 1e-3;
    double lr_end = 1e-5;
    std::uint64_t seed = 0;
    std::size_t kernel_len = 51;
    std::size_t n_layers = 3;
    std::size_t channels = 1;
    Activation activation = Activation::Tanh;
    double lambda_sym = 1.0;   // weight of the symmetry regularizer
    double beta_kl = 1.0;      // VAE only
    std::size_t lstm_hidden = 32;
    double val_fraction = 0.1;
};

// One sample: input channels x T and target channels x T.
struct Sample {
    std::vector<std::vector<double>> input;
    std::vector<std::vector<double>> target;
};

struct LossHistoryRow {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    LayerStack stack;
    std::vector<LossHistoryRow> history;
};

// Shared trainer for the spectrum and regression tasks: minimizes
// MSE + lambda_sym * symmetry(collapsed per-channel filters).
TrainResult train_supervised(const TrainingConfig& config, const std::vector<Sample>& dataset);

struct VaeTrainResult {
    LstmEncoder encoder;
    LayerStack decoder;
    std::vector<LossHistoryRow> history;
};

// Unsupervised VAE: LSTM encoder -> Gaussian latent sequence -> causal
// conv decoder. Loss: reconstruction MSE + beta_kl * KL + symmetry term.
VaeTrainResult train_vae(const TrainingConfig& config,
                         const std::vector<std::vector<std::vector<double>>>& samples);

void write_history_csv(const std::string& path, const std::vector<LossHistoryRow>& history);

// Parameter views in checkpoint declaration order.
std::vector<struct ParamView> stack_params(LayerStack& stack);
std::vector<struct ParamView> lstm_params(LstmEncoder& enc);

}  // namespace ccfir::nn
