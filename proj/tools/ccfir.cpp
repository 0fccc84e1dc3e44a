#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "ccfir/config.hpp"
#include "ccfir/experiments.hpp"
#include "ccfir/iir.hpp"
#include "ccfir/nn/checkpoint.hpp"
#include "ccfir/signal.hpp"

using namespace ccfir;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool paper_budget = false;
    bool paper_literal = false;
};

Config load_config(const GlobalOpts& opts) {
    if (opts.config_path.empty()) return Config{};
    return Config::parse_file(opts.config_path);
}

std::string config_text(const GlobalOpts& opts) {
    if (opts.config_path.empty()) return "";
    std::ifstream in(opts.config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t resolve_seed(const GlobalOpts& opts, const Config& config) {
    if (opts.seed_set) return opts.seed;
    return config.get_u64("seed", 0);
}

std::string resolve_out(const GlobalOpts& opts, const Config& config,
                        const std::string& fallback) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    return config.get_str("out", fallback);
}

std::set<std::string> with_globals(std::set<std::string> keys) {
    keys.insert("seed");
    keys.insert("out");
    return keys;
}

const std::set<std::string> kTrainKeys = {
    "train.epochs",     "train.batch_size", "train.lr_start",   "train.lr_end",
    "train.kernel_len", "train.n_layers",   "train.channels",   "train.activation",
    "train.lambda_sym", "train.beta_kl",    "train.lstm_hidden", "train.val_fraction",
};

nn::TrainingConfig parse_train(const Config& config, std::uint64_t seed) {
    nn::TrainingConfig train;
    train.epochs = config.get_u64("train.epochs", train.epochs);
    train.batch_size = config.get_u64("train.batch_size", train.batch_size);
    train.lr_start = config.get_double("train.lr_start", train.lr_start);
    train.lr_end = config.get_double("train.lr_end", train.lr_end);
    train.kernel_len = config.get_u64("train.kernel_len", train.kernel_len);
    train.n_layers = config.get_u64("train.n_layers", train.n_layers);
    train.channels = config.get_u64("train.channels", train.channels);
    train.lambda_sym = config.get_double("train.lambda_sym", train.lambda_sym);
    train.beta_kl = config.get_double("train.beta_kl", train.beta_kl);
    train.lstm_hidden = config.get_u64("train.lstm_hidden", train.lstm_hidden);
    train.val_fraction = config.get_double("train.val_fraction", train.val_fraction);
    train.seed = seed;
    const std::string act = config.get_str("train.activation", "tanh");
    if (act == "tanh")
        train.activation = nn::Activation::Tanh;
    else if (act == "identity" || act == "linear")
        train.activation = nn::Activation::Identity;
    else
        throw ConfigError("train.activation: expected tanh or identity, got " + act);
    if (train.kernel_len % 2 == 0)
        throw ConfigError("train.kernel_len must be odd for the LS-FIR comparison");
    if (train.epochs == 0) throw ConfigError("train.epochs must be positive");
    if (train.val_fraction < 0.0 || train.val_fraction >= 1.0)
        throw ConfigError("train.val_fraction must be in [0, 1)");
    return train;
}

const std::set<std::string> kSimKeys = {"sim.stiffnesses", "sim.zeta", "sim.fs",
                                        "sim.duration_s"};

SimulationConfig parse_sim(const Config& config, std::uint64_t seed) {
    SimulationConfig sim;
    if (config.has("sim.stiffnesses")) {
        const std::string raw = config.get_str("sim.stiffnesses");
        if (raw == "2dof")
            sim.stiffnesses = default_stiffness_2dof();
        else if (raw == "9dof")
            sim.stiffnesses = default_stiffness_9dof();
        else
            sim.stiffnesses = config.get_double_list("sim.stiffnesses");
    }
    sim.zeta = config.get_double("sim.zeta", sim.zeta);
    sim.fs = config.get_double("sim.fs", sim.fs);
    sim.duration_s = config.get_double("sim.duration_s", sim.duration_s);
    sim.seed = seed;
    if (sim.fs <= 0.0) throw ConfigError("sim.fs must be positive");
    if (sim.duration_s <= 0.0) throw ConfigError("sim.duration_s must be positive");
    if (sim.zeta < 0.0 || sim.zeta >= 1.0) throw ConfigError("sim.zeta must be in [0, 1)");
    return sim;
}

const std::set<std::string> kSpectrumKeys = {
    "spectrum.center_hz", "spectrum.bandwidth_hz",  "spectrum.fs",
    "spectrum.transition_hz", "spectrum.cheb_order", "spectrum.cheb_atten_db",
    "spectrum.pairs",     "spectrum.sample_steps", "spectrum.standardize",
};

SpectrumTaskConfig parse_spectrum(const Config& config, const GlobalOpts& opts,
                                  std::uint64_t seed) {
    SpectrumTaskConfig task;
    task.center_hz = config.get_double("spectrum.center_hz", task.center_hz);
    task.bandwidth_hz = config.get_double("spectrum.bandwidth_hz", task.bandwidth_hz);
    task.fs = config.get_double("spectrum.fs", task.fs);
    task.transition_hz = config.get_double("spectrum.transition_hz", task.transition_hz);
    task.cheb_order = config.get_u64("spectrum.cheb_order", task.cheb_order);
    task.cheb_atten_db = config.get_double("spectrum.cheb_atten_db", task.cheb_atten_db);
    task.pairs = config.get_u64("spectrum.pairs", task.pairs);
    task.sample_steps = config.get_u64("spectrum.sample_steps", task.sample_steps);
    task.standardize = config.get_bool("spectrum.standardize", task.standardize);
    task.train = parse_train(config, seed);
    task.paper_literal = opts.paper_literal;
    if (task.center_hz - task.bandwidth_hz / 2.0 <= 0.0 ||
        task.center_hz + task.bandwidth_hz / 2.0 >= task.fs / 2.0)
        throw ConfigError("spectrum band must sit strictly inside (0, fs/2)");
    return task;
}

int cmd_design_fir(const GlobalOpts& opts) {
    auto config = load_config(opts);
    config.require_known(with_globals(
        {"fir.f_lo", "fir.f_hi", "fir.fs", "fir.taps", "fir.transition_hz"}));
    const double fs = config.get_double("fir.fs", 100.0);
    const double f_lo = config.get_double("fir.f_lo", 9.5);
    const double f_hi = config.get_double("fir.f_hi", 10.5);
    const double transition = config.get_double("fir.transition_hz", 1.0);
    const std::uint64_t taps = config.get_u64("fir.taps", 201);
    if (f_lo <= 0.0 || f_hi <= f_lo || f_hi >= fs / 2.0)
        throw ConfigError("fir band must satisfy 0 < f_lo < f_hi < fs/2");
    if (taps % 2 == 0) throw ConfigError("fir.taps must be odd");

    const auto out = resolve_out(opts, config, "out/design-fir");
    auto filter = lsfir_design(bandpass_bands(f_lo, f_hi, fs, transition), taps, fs,
                               opts.paper_literal);
    std::filesystem::create_directories(out);
    write_fir_csv((std::filesystem::path(out) / "fir.csv").string(), filter);
    write_response_csv((std::filesystem::path(out) / "response.csv").string(),
                       fir_response(filter, 4097));
    write_manifest(out, config_text(opts), resolve_seed(opts, config));
    std::cout << "wrote " << taps << "-tap design to " << out << "\n";
    return 0;
}

int cmd_simulate(const GlobalOpts& opts) {
    auto config = load_config(opts);
    config.require_known(with_globals(kSimKeys));
    auto sim = parse_sim(config, resolve_seed(opts, config));
    const auto out = resolve_out(opts, config, "out/simulate");
    auto bundle = simulate_chain(sim);

    std::filesystem::create_directories(out);
    MultiChannel mc;
    mc.fs = bundle.fs;
    mc.channels = bundle.accelerations;
    write_multichannel_csv((std::filesystem::path(out) / "accelerations.csv").string(), mc);
    MultiChannel force;
    force.fs = bundle.fs;
    force.channels = {bundle.forcing};
    write_multichannel_csv((std::filesystem::path(out) / "forcing.csv").string(), force);
    {
        std::ofstream modes((std::filesystem::path(out) / "modes.csv").string());
        modes << "mode,freq_hz\n" << std::setprecision(17);
        for (std::size_t i = 0; i < bundle.system.natural_freqs_hz.size(); ++i)
            modes << i << "," << bundle.system.natural_freqs_hz[i] << "\n";
    }
    write_manifest(out, config_text(opts), sim.seed);
    std::cout << "simulated " << bundle.system.dof << "-dof chain ("
              << bundle.forcing.size() << " samples) to " << out << "\n";
    return 0;
}

int cmd_train_spectrum(const GlobalOpts& opts) {
    auto config = load_config(opts);
    auto keys = with_globals(kSpectrumKeys);
    keys.insert(kTrainKeys.begin(), kTrainKeys.end());
    config.require_known(keys);
    auto task = parse_spectrum(config, opts, resolve_seed(opts, config));
    task.out_dir = resolve_out(opts, config, "out/train-spectrum");
    auto result = run_spectrum_experiment(task);
    write_manifest(task.out_dir, config_text(opts), task.train.seed);
    std::cout << "peak " << result.metrics.peak_hz << " Hz, band ratio "
              << result.metrics.passband_stopband_db << " dB, xcorr "
              << result.metrics.xcorr << ", mean R^2 " << result.linearity.mean_r2
              << "\n";
    return 0;
}

int cmd_train_regression(const GlobalOpts& opts) {
    auto config = load_config(opts);
    auto keys = with_globals(kSimKeys);
    keys.insert(kTrainKeys.begin(), kTrainKeys.end());
    keys.insert("regression.discard_s");
    keys.insert("regression.segment_s");
    config.require_known(keys);

    RegressionTaskConfig task;
    const auto seed = resolve_seed(opts, config);
    task.sim = parse_sim(config, seed);
    task.discard_s = config.get_double("regression.discard_s", task.discard_s);
    task.segment_s = config.get_double("regression.segment_s", task.segment_s);
    task.train = parse_train(config, seed);
    task.out_dir = resolve_out(opts, config, "out/train-regression");
    auto result = run_regression_experiment(task);
    write_manifest(task.out_dir, config_text(opts), seed);

    std::cout << "true modes (Hz):";
    for (double f : result.system.natural_freqs_hz) std::cout << " " << f;
    std::cout << "\n";
    for (std::size_t c = 0; c < result.channel_peaks_hz.size(); ++c) {
        std::cout << "channel " << c << " peaks (Hz):";
        for (double p : result.channel_peaks_hz[c]) std::cout << " " << p;
        std::cout << "\n";
    }
    return 0;
}

int cmd_train_vae(const GlobalOpts& opts) {
    auto config = load_config(opts);
    auto keys = with_globals(kSimKeys);
    keys.insert(kTrainKeys.begin(), kTrainKeys.end());
    keys.insert("vae.discard_s");
    keys.insert("vae.segment_s");
    config.require_known(keys);

    VaeTaskConfig task;
    const auto seed = resolve_seed(opts, config);
    task.sim = parse_sim(config, seed);
    task.discard_s = config.get_double("vae.discard_s", task.discard_s);
    task.segment_s = config.get_double("vae.segment_s", task.segment_s);
    task.train = parse_train(config, seed);
    task.out_dir = resolve_out(opts, config, "out/train-vae");
    auto result = run_vae_experiment(task);
    write_manifest(task.out_dir, config_text(opts), seed);

    std::cout << "true modes (Hz):";
    for (double f : result.system.natural_freqs_hz) std::cout << " " << f;
    std::cout << "\ndominant channel peaks (Hz):";
    for (double p : result.dominant_peak_hz) std::cout << " " << p;
    std::cout << "\n";
    return 0;
}

int cmd_collapse(const GlobalOpts& opts) {
    auto config = load_config(opts);
    config.require_known(with_globals({"collapse.checkpoint", "collapse.fs"}));
    const std::string ckpt = config.get_str("collapse.checkpoint");
    const double fs = config.get_double("collapse.fs", 100.0);
    const auto out = resolve_out(opts, config, "out/collapse");

    auto stack = nn::load_checkpoint(ckpt);
    stack.training = false;
    auto collapsed = collapse_stack(stack, fs);

    std::filesystem::create_directories(out);
    {
        std::ofstream per((std::filesystem::path(out) / "per_channel.csv").string());
        per << "channel,index,tap\n" << std::setprecision(17);
        for (std::size_t c = 0; c < collapsed.per_channel.size(); ++c)
            for (std::size_t i = 0; i < collapsed.per_channel[c].size(); ++i)
                per << c << "," << i << "," << collapsed.per_channel[c][i] << "\n";
    }
    {
        std::ofstream e2e((std::filesystem::path(out) / "end_to_end.csv").string());
        e2e << "output,input,index,tap\n" << std::setprecision(17);
        for (std::size_t o = 0; o < collapsed.end_to_end.size(); ++o)
            for (std::size_t i = 0; i < collapsed.end_to_end[o].size(); ++i)
                for (std::size_t k = 0; k < collapsed.end_to_end[o][i].size(); ++k)
                    e2e << o << "," << i << "," << k << ","
                        << collapsed.end_to_end[o][i][k] << "\n";
    }
    {
        std::ofstream off((std::filesystem::path(out) / "offsets.csv").string());
        off << "output,offset\n" << std::setprecision(17);
        for (std::size_t o = 0; o < collapsed.end_to_end_offset.size(); ++o)
            off << o << "," << collapsed.end_to_end_offset[o] << "\n";
    }
    write_manifest(out, config_text(opts), resolve_seed(opts, config));
    std::cout << "collapsed " << stack.layers.size() << "-layer stack ("
              << collapsed.per_channel[0].size() << " taps per channel) to " << out
              << "\n";
    return 0;
}

int cmd_fdd(const GlobalOpts& opts) {
    auto config = load_config(opts);
    auto keys = with_globals(kSimKeys);
    keys.insert({"fdd.window_len", "fdd.overlap", "fdd.min_prominence_ratio",
                 "fdd.min_separation_hz", "fdd.input_csv"});
    config.require_known(keys);

    FddTaskConfig task;
    const auto seed = resolve_seed(opts, config);
    task.sim = parse_sim(config, seed);
    task.window_len = config.get_u64("fdd.window_len", task.window_len);
    task.overlap = config.get_double("fdd.overlap", task.overlap);
    task.min_prominence_ratio =
        config.get_double("fdd.min_prominence_ratio", task.min_prominence_ratio);
    task.min_separation_hz =
        config.get_double("fdd.min_separation_hz", task.min_separation_hz);
    task.out_dir = resolve_out(opts, config, "out/fdd");
    if (task.overlap < 0.0 || task.overlap >= 1.0)
        throw ConfigError("fdd.overlap must be in [0, 1)");
    if (task.window_len < 4) throw ConfigError("fdd.window_len too small");

    std::vector<double> peaks;
    if (config.has("fdd.input_csv")) {
        auto mc = read_multichannel_csv(config.get_str("fdd.input_csv"));
        auto cpsd = cpsd_matrix(mc, task.window_len, task.overlap);
        auto spectra = fdd_singular_values(cpsd, mc.channels.size());
        Spectrum first;
        first.freqs = spectra.freqs;
        for (const auto& row : spectra.values) first.values.push_back(row[0]);
        peaks = peak_pick(first, task.min_prominence_ratio, task.min_separation_hz);
        std::filesystem::create_directories(task.out_dir);
        write_singular_csv(
            (std::filesystem::path(task.out_dir) / "singular.csv").string(), spectra);
        std::ofstream out((std::filesystem::path(task.out_dir) / "peaks.csv").string());
        out << "peak_hz\n" << std::setprecision(17);
        for (double p : peaks) out << p << "\n";
    } else {
        auto result = run_fdd_experiment(task);
        peaks = result.peaks_hz;
    }
    write_manifest(task.out_dir, config_text(opts), seed);
    std::cout << "fdd peaks (Hz):";
    for (double p : peaks) std::cout << " " << p;
    std::cout << "\n";
    return 0;
}

int cmd_sweep(const GlobalOpts& opts) {
    auto config = load_config(opts);
    auto keys = with_globals(kSpectrumKeys);
    keys.insert(kTrainKeys.begin(), kTrainKeys.end());
    keys.insert({"sweep.layers", "sweep.kernels", "sweep.activations", "sweep.workers"});
    config.require_known(keys);

    SweepTaskConfig task;
    task.base = parse_spectrum(config, opts, resolve_seed(opts, config));
    if (!opts.paper_budget)
        task.base.train.epochs = std::min<std::size_t>(task.base.train.epochs, 50);
    if (config.has("sweep.layers")) {
        task.layer_grid.clear();
        for (double v : config.get_double_list("sweep.layers"))
            task.layer_grid.push_back(static_cast<std::size_t>(v));
    }
    if (config.has("sweep.kernels")) {
        task.kernel_grid.clear();
        for (double v : config.get_double_list("sweep.kernels")) {
            if (static_cast<std::size_t>(v) % 2 == 0)
                throw ConfigError("sweep.kernels must all be odd");
            task.kernel_grid.push_back(static_cast<std::size_t>(v));
        }
    }
    if (config.has("sweep.activations")) {
        task.activation_grid.clear();
        for (const auto& name : config.get_str_list("sweep.activations")) {
            if (name == "tanh")
                task.activation_grid.push_back(nn::Activation::Tanh);
            else if (name == "identity" || name == "linear")
                task.activation_grid.push_back(nn::Activation::Identity);
            else
                throw ConfigError("sweep.activations: unknown activation " + name);
        }
    }
    task.workers = config.get_u64("sweep.workers", task.workers);
    task.out_dir = resolve_out(opts, config, "out/sweep");

    auto result = run_sweep(task);
    write_manifest(task.out_dir, config_text(opts), task.base.train.seed);
    for (const auto& cell : result.cells) {
        std::cout << "M=" << cell.layers << " p=" << cell.kernel << " "
                  << (cell.activation == nn::Activation::Tanh ? "tanh" : "linear")
                  << ": ";
        if (cell.failed)
            std::cout << "failed (" << cell.error << ")\n";
        else
            std::cout << "val loss " << cell.final_val_loss << "\n";
    }
    return 0;
}

bool looks_like_io_error(const std::string& what) {
    return what.rfind("cannot open", 0) == 0 || what.rfind("cannot write", 0) == 0 ||
           what.rfind("cannot read", 0) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal conv FIR toolkit"};
    app.require_subcommand(1);
    GlobalOpts opts;

    int (*handler)(const GlobalOpts&) = nullptr;
    auto add = [&](const std::string& name, const std::string& desc,
                   int (*fn)(const GlobalOpts&)) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opts.config_path, "key=value config file");
        sub->add_option("--seed", opts.seed, "master seed (overrides config)")
            ->each([&](const std::string&) { opts.seed_set = true; });
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_flag("--paper-budget", opts.paper_budget,
                      "full training budget instead of the reduced sweep default");
        sub->add_flag("--paper-literal", opts.paper_literal,
                      "doubled-center LS-FIR assembly variant");
        sub->callback([&handler, fn]() { handler = fn; });
        return sub;
    };

    add("design-fir", "least-squares linear-phase bandpass design", cmd_design_fir);
    add("simulate-mdof", "white-noise forced lumped-mass chain", cmd_simulate);
    add("train-spectrum", "spectrum learning task with LS-FIR comparison",
        cmd_train_spectrum);
    add("train-regression", "forcing -> acceleration regression task",
        cmd_train_regression);
    add("train-vae", "unsupervised LSTM-encoder / conv-decoder task", cmd_train_vae);
    add("collapse", "fold a checkpointed stack into FIR filters", cmd_collapse);
    add("fdd", "frequency domain decomposition baseline", cmd_fdd);
    add("sweep", "depth / kernel / activation grid on the spectrum task", cmd_sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        return handler(opts);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const nn::CheckpointVersionError& ex) {
        std::cerr << "io error: " << ex.what() << "\n";
        return 4;
    } catch (const nn::CheckpointChecksumError& ex) {
        std::cerr << "io error: " << ex.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& ex) {
        std::cerr << "io error: " << ex.what() << "\n";
        return 4;
    } catch (const std::ios_base::failure& ex) {
        std::cerr << "io error: " << ex.what() << "\n";
        return 4;
    } catch (const std::runtime_error& ex) {
        if (looks_like_io_error(ex.what())) {
            std::cerr << "io error: " << ex.what() << "\n";
            return 4;
        }
        std::cerr << "numeric failure: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "numeric failure: " << ex.what() << "\n";
        return 3;
    }
}
