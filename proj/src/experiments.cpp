#include "ccfir/experiments.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ccfir/iir.hpp"
#include "ccfir/nn/checkpoint.hpp"
#include "ccfir/rng.hpp"
#include "ccfir/signal.hpp"

namespace ccfir {

namespace {

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::vector<nn::Sample> make_spectrum_dataset(const SpectrumTaskConfig& config) {
    const double f_lo = config.center_hz - config.bandwidth_hz / 2.0;
    const double f_hi = config.center_hz + config.bandwidth_hz / 2.0;
    const auto cascade =
        cheby2_bandpass(config.cheb_order, config.cheb_atten_db, f_lo, f_hi, config.fs);

    std::vector<nn::Sample> dataset;
    dataset.reserve(config.pairs);
    for (std::size_t i = 0; i < config.pairs; ++i) {
        auto noise = white_noise(config.sample_steps,
                                 Rng::derive_seed(config.train.seed, 10000 + i));
        noise.fs = config.fs;
        auto filtered = iir_filter(cascade, noise);
        nn::Sample sample;
        sample.input = {std::move(noise.samples)};
        sample.target = {std::move(filtered.samples)};
        dataset.push_back(std::move(sample));
    }
    if (!config.standardize) return dataset;
    // standardize the targets so the training signal is O(1); the comparison
    // metrics are scale-invariant
    double s2 = 0.0;
    std::size_t count = 0;
    for (const auto& sample : dataset) {
        for (double v : sample.target[0]) s2 += v * v;
        count += sample.target[0].size();
    }
    const double scale = std::sqrt(s2 / static_cast<double>(count));
    if (scale > 0.0)
        for (auto& sample : dataset)
            for (double& v : sample.target[0]) v /= scale;
    return dataset;
}

Spectrum magnitude_squared(const FirResponse& resp) {
    Spectrum spec;
    spec.freqs = resp.freqs;
    spec.unit = SpectrumUnit::PowerDensity;
    for (double m : resp.magnitude) spec.values.push_back(m * m);
    return spec;
}

SpectrumMetrics spectrum_metrics(const FirFilter& collapsed, const FirFilter& reference,
                                 const SpectrumTaskConfig& config) {
    const std::size_t n_freqs = 4097;
    auto net = fir_response(collapsed, n_freqs);
    auto ref = fir_response(reference, n_freqs);

    SpectrumMetrics metrics;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < net.magnitude.size(); ++i)
        if (net.magnitude[i] > net.magnitude[peak]) peak = i;
    metrics.peak_hz = net.freqs[peak];

    const double f_lo = config.center_hz - config.bandwidth_hz / 2.0;
    const double f_hi = config.center_hz + config.bandwidth_hz / 2.0;
    double pass = 0.0, stop = 0.0;
    std::size_t n_pass = 0, n_stop = 0;
    for (std::size_t i = 0; i < net.freqs.size(); ++i) {
        const double f = net.freqs[i];
        const double p = net.magnitude[i] * net.magnitude[i];
        if (f >= f_lo && f <= f_hi) {
            pass += p;
            ++n_pass;
        } else if (f <= f_lo - config.transition_hz || f >= f_hi + config.transition_hz) {
            stop += p;
            ++n_stop;
        }
    }
    if (n_pass && n_stop && stop > 0.0)
        metrics.passband_stopband_db =
            10.0 * std::log10((pass / static_cast<double>(n_pass)) /
                              (stop / static_cast<double>(n_stop)));

    double num = 0.0, den1 = 0.0, den2 = 0.0;
    for (std::size_t i = 0; i < net.magnitude.size(); ++i) {
        num += net.magnitude[i] * ref.magnitude[i];
        den1 += net.magnitude[i] * net.magnitude[i];
        den2 += ref.magnitude[i] * ref.magnitude[i];
    }
    if (den1 > 0.0 && den2 > 0.0) metrics.xcorr = num / std::sqrt(den1 * den2);
    return metrics;
}

void write_response_comparison(const std::string& path, const FirFilter& net,
                               const FirFilter& ref) {
    auto net_resp = fir_response(net, 4097);
    auto ref_resp = fir_response(ref, 4097);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "freq_hz,net_magnitude,lsfir_magnitude\n" << std::setprecision(17);
    for (std::size_t i = 0; i < net_resp.freqs.size(); ++i)
        out << net_resp.freqs[i] << "," << net_resp.magnitude[i] << ","
            << ref_resp.magnitude[i] << "\n";
}

void write_channel_spectra(const std::string& path,
                           const std::vector<FirFilter>& channels) {
    std::vector<FirResponse> resps;
    for (const auto& filter : channels) resps.push_back(fir_response(filter, 4097));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "freq_hz";
    for (std::size_t c = 0; c < channels.size(); ++c) out << ",ch" << c;
    out << "\n" << std::setprecision(17);
    for (std::size_t i = 0; i < resps[0].freqs.size(); ++i) {
        out << resps[0].freqs[i];
        for (const auto& r : resps) out << "," << r.magnitude[i] * r.magnitude[i];
        out << "\n";
    }
}

void write_peaks_csv(const std::string& path,
                     const std::vector<std::vector<double>>& channel_peaks) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "channel,peak_hz\n" << std::setprecision(17);
    for (std::size_t c = 0; c < channel_peaks.size(); ++c)
        for (double p : channel_peaks[c]) out << c << "," << p << "\n";
}

void write_modes_csv(const std::string& path, const MdofSystem& system) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "mode,freq_hz\n" << std::setprecision(17);
    for (std::size_t i = 0; i < system.natural_freqs_hz.size(); ++i)
        out << i << "," << system.natural_freqs_hz[i] << "\n";
}

// Per-latent-channel equivalent filter including the expansion weight of the
// (single) input.
std::vector<FirFilter> latent_channel_filters(const CollapsedFilter& collapsed,
                                              const Eigen::MatrixXd& expansion) {
    std::vector<FirFilter> filters;
    for (std::size_t c = 0; c < collapsed.per_channel.size(); ++c) {
        FirFilter filter;
        filter.fs = collapsed.fs;
        const double w = expansion.cols() > 0 ? expansion(static_cast<Eigen::Index>(c), 0) : 1.0;
        for (double tap : collapsed.per_channel[c]) filter.taps.push_back(w * tap);
        filters.push_back(std::move(filter));
    }
    return filters;
}

std::vector<std::vector<double>> pick_channel_peaks(const std::vector<FirFilter>& channels,
                                                    double prominence, double min_sep_hz) {
    std::vector<std::vector<double>> peaks;
    for (const auto& filter : channels) {
        auto spec = magnitude_squared(fir_response(filter, 4097));
        peaks.push_back(peak_pick(spec, prominence, min_sep_hz));
    }
    return peaks;
}

double global_std(const std::vector<std::vector<double>>& channels) {
    double s = 0.0, s2 = 0.0;
    std::size_t count = 0;
    for (const auto& ch : channels) {
        for (double v : ch) {
            s += v;
            s2 += v * v;
        }
        count += ch.size();
    }
    if (count == 0) return 1.0;
    const double mean = s / static_cast<double>(count);
    const double var = s2 / static_cast<double>(count) - mean * mean;
    return var > 0.0 ? std::sqrt(var) : 1.0;
}

}  // namespace

SpectrumResult run_spectrum_experiment(const SpectrumTaskConfig& config) {
    if (config.center_hz - config.bandwidth_hz / 2.0 <= 0.0 ||
        config.center_hz + config.bandwidth_hz / 2.0 >= config.fs / 2.0)
        throw std::invalid_argument("spectrum: band must sit inside (0, fs/2)");
    if (config.pairs < 2) throw std::invalid_argument("spectrum: need at least 2 pairs");

    auto dataset = make_spectrum_dataset(config);

    SpectrumResult result;
    result.train = nn::train_supervised(config.train, dataset);

    result.collapsed = collapse_stack(result.train.stack, config.fs);

    // reference filter at the configured kernel width, matching the
    // "filters with p taps" comparison convention
    const std::size_t p_ref = config.train.kernel_len;
    const double f_lo = config.center_hz - config.bandwidth_hz / 2.0;
    const double f_hi = config.center_hz + config.bandwidth_hz / 2.0;
    result.reference = lsfir_design(bandpass_bands(f_lo, f_hi, config.fs, config.transition_hz),
                                    p_ref, config.fs, config.paper_literal);

    // linearity on a handful of held-back samples
    const std::size_t probe = std::min<std::size_t>(8, dataset.size());
    nn::Tensor3 batch(probe, 1, config.sample_steps);
    for (std::size_t b = 0; b < probe; ++b)
        for (std::size_t t = 0; t < config.sample_steps; ++t)
            batch.at(b, 0, t) = dataset[dataset.size() - 1 - b].input[0][t];
    result.linearity = linearity_r2(result.train.stack, batch);

    FirFilter net;
    net.fs = config.fs;
    net.taps = result.collapsed.end_to_end[0][0];
    result.metrics = spectrum_metrics(net, result.reference, config);

    if (!config.out_dir.empty()) {
        ensure_dir(config.out_dir);
        nn::write_history_csv(join(config.out_dir, "history.csv"), result.train.history);
        nn::save_checkpoint(join(config.out_dir, "model.ckpt"), result.train.stack);
        write_fir_csv(join(config.out_dir, "collapsed.csv"), net);
        write_fir_csv(join(config.out_dir, "reference.csv"), result.reference);
        write_response_comparison(join(config.out_dir, "response.csv"), net, result.reference);
        write_linearity_csv(join(config.out_dir, "linearity.csv"), result.linearity);
        std::ofstream metrics(join(config.out_dir, "metrics.csv"));
        metrics << "peak_hz,passband_stopband_db,xcorr,mean_r2\n"
                << std::setprecision(17) << result.metrics.peak_hz << ","
                << result.metrics.passband_stopband_db << "," << result.metrics.xcorr << ","
                << result.linearity.mean_r2 << "\n";
    }
    return result;
}

SimulationBundle simulate_chain(const SimulationConfig& config) {
    const auto stiffnesses =
        config.stiffnesses.empty() ? default_stiffness_2dof() : config.stiffnesses;
    SimulationBundle bundle;
    bundle.system = build_chain(stiffnesses, config.zeta);
    bundle.fs = config.fs;

    const double f_max = bundle.system.natural_freqs_hz.back();
    const std::size_t factor =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(5.0 * f_max / config.fs)));
    const double sim_fs = config.fs * static_cast<double>(factor);

    auto forcing = white_noise(
        static_cast<std::size_t>(config.duration_s * sim_fs), Rng::derive_seed(config.seed, 1));
    forcing.fs = sim_fs;
    auto record = simulate_rk4(bundle.system, forcing);

    if (factor == 1) {
        bundle.forcing = std::move(forcing.samples);
        bundle.accelerations = std::move(record.accelerations);
    } else {
        auto down = resample(forcing, 1, factor);
        bundle.forcing = std::move(down.samples);
        for (auto& accel : record.accelerations) {
            TimeSeries ts;
            ts.fs = sim_fs;
            ts.samples = std::move(accel);
            bundle.accelerations.push_back(resample(ts, 1, factor).samples);
        }
        // resampling may drop a trailing sample; align lengths
        std::size_t len = bundle.forcing.size();
        for (const auto& accel : bundle.accelerations) len = std::min(len, accel.size());
        bundle.forcing.resize(len);
        for (auto& accel : bundle.accelerations) accel.resize(len);
    }
    return bundle;
}

RegressionResult run_regression_experiment(const RegressionTaskConfig& config) {
    auto bundle = simulate_chain(config.sim);

    const std::size_t discard =
        static_cast<std::size_t>(config.discard_s * config.sim.fs);
    const std::size_t steps_per =
        static_cast<std::size_t>(std::lround(config.segment_s * config.sim.fs));
    if (discard + steps_per > bundle.forcing.size())
        throw std::invalid_argument("regression: record too short for segmenting");

    // standardize so the network trains on O(1) targets
    std::vector<std::vector<double>> accel;
    for (const auto& ch : bundle.accelerations)
        accel.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(discard), ch.end());
    const double scale = global_std(accel);
    for (auto& ch : accel)
        for (double& v : ch) v /= scale;
    std::vector<double> forcing(bundle.forcing.begin() + static_cast<std::ptrdiff_t>(discard),
                                bundle.forcing.end());

    std::vector<nn::Sample> dataset;
    const std::size_t n_segments = forcing.size() / steps_per;
    for (std::size_t s = 0; s < n_segments; ++s) {
        nn::Sample sample;
        const std::size_t begin = s * steps_per;
        sample.input = {{forcing.begin() + static_cast<std::ptrdiff_t>(begin),
                         forcing.begin() + static_cast<std::ptrdiff_t>(begin + steps_per)}};
        for (const auto& ch : accel)
            sample.target.push_back({ch.begin() + static_cast<std::ptrdiff_t>(begin),
                                     ch.begin() + static_cast<std::ptrdiff_t>(begin + steps_per)});
        dataset.push_back(std::move(sample));
    }

    RegressionResult result;
    result.system = bundle.system;
    result.train = nn::train_supervised(config.train, dataset);
    result.collapsed = collapse_stack(result.train.stack, config.sim.fs);

    auto channels = latent_channel_filters(result.collapsed, result.train.stack.expansion);
    result.channel_peaks_hz = pick_channel_peaks(channels, 2.0, 1.0);

    if (!config.out_dir.empty()) {
        ensure_dir(config.out_dir);
        nn::write_history_csv(join(config.out_dir, "history.csv"), result.train.history);
        nn::save_checkpoint(join(config.out_dir, "model.ckpt"), result.train.stack);
        write_channel_spectra(join(config.out_dir, "channel_spectra.csv"), channels);
        write_peaks_csv(join(config.out_dir, "channel_peaks.csv"), result.channel_peaks_hz);
        write_modes_csv(join(config.out_dir, "modes.csv"), result.system);
    }
    return result;
}

VaeResult run_vae_experiment(const VaeTaskConfig& config) {
    auto bundle = simulate_chain(config.sim);

    const std::size_t discard =
        static_cast<std::size_t>(config.discard_s * config.sim.fs);
    const std::size_t steps_per =
        static_cast<std::size_t>(std::lround(config.segment_s * config.sim.fs));
    if (discard + steps_per > bundle.forcing.size())
        throw std::invalid_argument("vae: record too short for segmenting");

    std::vector<std::vector<double>> accel;
    for (const auto& ch : bundle.accelerations)
        accel.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(discard), ch.end());
    const double scale = global_std(accel);
    for (auto& ch : accel)
        for (double& v : ch) v /= scale;

    std::vector<std::vector<std::vector<double>>> samples;
    const std::size_t n_segments = accel[0].size() / steps_per;
    for (std::size_t s = 0; s < n_segments; ++s) {
        std::vector<std::vector<double>> sample;
        const std::size_t begin = s * steps_per;
        for (const auto& ch : accel)
            sample.push_back({ch.begin() + static_cast<std::ptrdiff_t>(begin),
                              ch.begin() + static_cast<std::ptrdiff_t>(begin + steps_per)});
        samples.push_back(std::move(sample));
    }

    VaeResult result;
    result.system = bundle.system;
    result.train = nn::train_vae(config.train, samples);
    result.collapsed = collapse_stack(result.train.decoder, config.sim.fs);

    std::vector<FirFilter> channels;
    for (const auto& taps : result.collapsed.per_channel) {
        FirFilter filter;
        filter.fs = config.sim.fs;
        filter.taps = taps;
        channels.push_back(std::move(filter));
    }
    result.channel_peaks_hz = pick_channel_peaks(channels, 1.5, 1.0);
    for (const auto& filter : channels) {
        auto resp = fir_response(filter, 4097);
        std::size_t peak = 0;
        for (std::size_t i = 1; i < resp.magnitude.size(); ++i)
            if (resp.magnitude[i] > resp.magnitude[peak]) peak = i;
        result.dominant_peak_hz.push_back(resp.freqs[peak]);
    }

    if (!config.out_dir.empty()) {
        ensure_dir(config.out_dir);
        nn::write_history_csv(join(config.out_dir, "history.csv"), result.train.history);
        nn::save_checkpoint(join(config.out_dir, "decoder.ckpt"), result.train.decoder);
        write_channel_spectra(join(config.out_dir, "channel_spectra.csv"), channels);
        write_peaks_csv(join(config.out_dir, "channel_peaks.csv"), result.channel_peaks_hz);
        write_modes_csv(join(config.out_dir, "modes.csv"), result.system);
    }
    return result;
}

SweepResult run_sweep(const SweepTaskConfig& config) {
    auto dataset = make_spectrum_dataset(config.base);

    std::vector<SweepCell> cells;
    for (std::size_t layers : config.layer_grid)
        for (std::size_t kernel : config.kernel_grid)
            for (auto activation : config.activation_grid) {
                SweepCell cell;
                cell.layers = layers;
                cell.kernel = kernel;
                cell.activation = activation;
                cells.push_back(cell);
            }

    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::max<std::size_t>(1, config.workers);
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            auto& cell = cells[i];
            try {
                nn::TrainingConfig train = config.base.train;
                train.n_layers = cell.layers;
                train.kernel_len = cell.kernel;
                train.activation = cell.activation;
                // cells share the master seed so the split, the shuffling
                // stream, and (for equal shapes) the init draws are paired
                // across grid points
                train.seed = config.base.train.seed;
                auto result = nn::train_supervised(train, dataset);
                cell.final_val_loss = result.history.back().val_loss;
                cell.final_train_loss = result.history.back().train_loss;
            } catch (const std::exception& ex) {
                cell.failed = true;
                cell.error = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (!config.out_dir.empty()) {
        ensure_dir(config.out_dir);
        std::ofstream out(join(config.out_dir, "sweep.csv"));
        if (!out) throw std::runtime_error("cannot write sweep.csv");
        out << "layers,kernel,activation,train_loss,val_loss,status\n"
            << std::setprecision(17);
        for (const auto& cell : cells)
            out << cell.layers << "," << cell.kernel << ","
                << (cell.activation == nn::Activation::Tanh ? "tanh" : "linear") << ","
                << cell.final_train_loss << "," << cell.final_val_loss << ","
                << (cell.failed ? "failed" : "ok") << "\n";
    }
    return {cells};
}

FddResult run_fdd_experiment(const FddTaskConfig& config) {
    if (config.overlap < 0.0 || config.overlap >= 1.0)
        throw std::invalid_argument("fdd: overlap must be in [0, 1)");
    auto bundle = simulate_chain(config.sim);

    MultiChannel mc;
    mc.fs = config.sim.fs;
    mc.channels = bundle.accelerations;

    FddResult result;
    result.system = bundle.system;
    auto cpsd = cpsd_matrix(mc, config.window_len, config.overlap);
    result.spectra = fdd_singular_values(cpsd, bundle.system.dof);

    Spectrum first;
    first.freqs = result.spectra.freqs;
    for (const auto& row : result.spectra.values) first.values.push_back(row[0]);
    result.peaks_hz =
        peak_pick(first, config.min_prominence_ratio, config.min_separation_hz);

    if (!config.out_dir.empty()) {
        ensure_dir(config.out_dir);
        write_singular_csv(join(config.out_dir, "singular.csv"), result.spectra);
        std::ofstream out(join(config.out_dir, "peaks.csv"));
        out << "peak_hz\n" << std::setprecision(17);
        for (double p : result.peaks_hz) out << p << "\n";
        write_modes_csv(join(config.out_dir, "modes.csv"), result.system);
    }
    return result;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_manifest(const std::string& out_dir, const std::string& config_text,
                    std::uint64_t seed) {
    ensure_dir(out_dir);
    std::ofstream out(join(out_dir, "manifest.txt"));
    if (!out) throw std::runtime_error("cannot write manifest.txt");
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config_text);
    std::ostringstream build;
    build << std::hex << std::setw(16) << std::setfill('0')
          << fnv1a64(std::string(__DATE__) + " " + __TIME__);
    out << "config_hash = " << hash.str() << "\n";
    out << "seed = " << seed << "\n";
    out << "build_id = " << build.str() << "\n";
}

}  // namespace ccfir
