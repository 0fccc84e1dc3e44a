#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccfir/collapse.hpp"
#include "ccfir/fir.hpp"
#include "ccfir/mdof.hpp"
#include "ccfir/nn/train.hpp"
#include "ccfir/oma.hpp"

namespace ccfir {

// ---- spectrum learning: white noise -> Chebyshev-filtered target ----

struct SpectrumTaskConfig {
    double center_hz = 10.0;
    double bandwidth_hz = 1.0;
    double fs = 100.0;
    double transition_hz = 1.0;   // LS-FIR don't-care width
    std::size_t cheb_order = 8;
    double cheb_atten_db = 80.0;
    std::size_t pairs = 9000;
    std::size_t sample_steps = 256;
    bool standardize = true;  // rescale targets to unit power before training
    nn::TrainingConfig train;
    bool paper_literal = false;
    std::string out_dir;  // empty: keep results in memory only
};

struct SpectrumMetrics {
    double peak_hz = 0.0;
    double passband_stopband_db = 0.0;  // collapsed-filter energy ratio
    double xcorr = 0.0;                 // vs the LS-FIR magnitude response
};

struct SpectrumResult {
    nn::TrainResult train;
    CollapsedFilter collapsed;
    FirFilter reference;  // LS-FIR of matching length
    LinearityReport linearity;
    SpectrumMetrics metrics;
};

SpectrumResult run_spectrum_experiment(const SpectrumTaskConfig& config);

// ---- simulation shared by the regression / vae / fdd tasks ----

struct SimulationConfig {
    std::vector<double> stiffnesses;  // empty: 2-DOF preset
    double zeta = 0.01;
    double fs = 100.0;
    double duration_s = 1000.0;
    std::uint64_t seed = 0;
};

struct SimulationBundle {
    MdofSystem system;
    std::vector<double> forcing;                  // at fs
    std::vector<std::vector<double>> accelerations;  // dof x steps, at fs
    double fs = 100.0;
};

// Integrates at an internally oversampled rate when the top mode needs it and
// resamples the records back to fs.
SimulationBundle simulate_chain(const SimulationConfig& config);

// ---- regression: forcing -> accelerations ----

struct RegressionTaskConfig {
    SimulationConfig sim;
    double discard_s = 10.0;  // transient
    double segment_s = 3.0;
    nn::TrainingConfig train;
    std::string out_dir;
};

struct RegressionResult {
    MdofSystem system;
    nn::TrainResult train;
    CollapsedFilter collapsed;
    // peaks of each latent channel's collapsed magnitude response, Hz
    std::vector<std::vector<double>> channel_peaks_hz;
};

RegressionResult run_regression_experiment(const RegressionTaskConfig& config);

// ---- unsupervised vae: accelerations only ----

struct VaeTaskConfig {
    SimulationConfig sim;
    double discard_s = 10.0;
    double segment_s = 3.0;
    nn::TrainingConfig train;
    std::string out_dir;
};

struct VaeResult {
    MdofSystem system;
    nn::VaeTrainResult train;
    CollapsedFilter collapsed;  // decoder stack
    std::vector<std::vector<double>> channel_peaks_hz;
    std::vector<double> dominant_peak_hz;  // strongest peak per channel
};

VaeResult run_vae_experiment(const VaeTaskConfig& config);

// ---- appendix sweeps over depth / width / activation ----

struct SweepTaskConfig {
    SpectrumTaskConfig base;  // dataset definition and shared budget
    std::vector<std::size_t> layer_grid{1, 3};
    std::vector<std::size_t> kernel_grid{15, 51, 75};
    std::vector<nn::Activation> activation_grid{nn::Activation::Identity,
                                                nn::Activation::Tanh};
    std::size_t workers = 4;
    std::string out_dir;
};

struct SweepCell {
    std::size_t layers = 0;
    std::size_t kernel = 0;
    nn::Activation activation = nn::Activation::Identity;
    double final_val_loss = 0.0;
    double final_train_loss = 0.0;  // full objective incl. the symmetry term
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepCell> cells;
};

SweepResult run_sweep(const SweepTaskConfig& config);

// ---- fdd baseline on a simulated chain ----

struct FddTaskConfig {
    SimulationConfig sim;
    std::size_t window_len = 1024;
    double overlap = 0.5;
    double min_prominence_ratio = 2.0;
    double min_separation_hz = 1.0;
    std::string out_dir;
};

struct FddResult {
    MdofSystem system;
    SingularSpectra spectra;
    std::vector<double> peaks_hz;  // from the first singular value line
};

FddResult run_fdd_experiment(const FddTaskConfig& config);

// ---- artifact plumbing ----

// Writes manifest.txt (config hash, seed, build id) into out_dir.
void write_manifest(const std::string& out_dir, const std::string& config_text,
                    std::uint64_t seed);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace ccfir
