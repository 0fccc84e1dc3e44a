#include "ccfir/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "ccfir/collapse.hpp"
#include "ccfir/nn/ops.hpp"
#include "ccfir/nn/optimizer.hpp"
#include "ccfir/rng.hpp"

namespace ccfir::nn {

namespace {

ParamView view(Eigen::MatrixXd& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
ParamView view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
}

Tensor3 gather(const std::vector<Sample>& dataset, const std::vector<std::size_t>& idx,
               std::size_t lo, std::size_t hi, bool input_side) {
    const auto& first = input_side ? dataset[idx[lo]].input : dataset[idx[lo]].target;
    Tensor3 t(hi - lo, first.size(), first[0].size());
    for (std::size_t s = lo; s < hi; ++s) {
        const auto& sample = input_side ? dataset[idx[s]].input : dataset[idx[s]].target;
        for (std::size_t c = 0; c < sample.size(); ++c)
            std::copy(sample[c].begin(), sample[c].end(), t.row(s - lo, c));
    }
    return t;
}

void check_finite(double loss, std::size_t epoch) {
    if (!std::isfinite(loss))
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch));
}

}  // namespace

std::vector<ParamView> stack_params(LayerStack& stack) {
    std::vector<ParamView> p;
    p.push_back(view(stack.expansion));
    for (auto& layer : stack.layers) {
        p.push_back(view(layer.kernels));
        p.push_back(view(layer.gamma));
    }
    p.push_back(view(stack.projection));
    return p;
}

std::vector<ParamView> lstm_params(LstmEncoder& enc) {
    std::vector<ParamView> p;
    for (auto& layer : enc.layers) {
        p.push_back(view(layer.w_ih));
        p.push_back(view(layer.w_hh));
        p.push_back(view(layer.bias));
    }
    p.push_back(view(enc.head_mu));
    p.push_back(view(enc.head_mu_b));
    p.push_back(view(enc.head_logvar));
    p.push_back(view(enc.head_logvar_b));
    return p;
}

namespace {

std::vector<ParamView> grad_views(StackGrad& g) {
    std::vector<ParamView> p;
    p.push_back(view(g.expansion));
    for (auto& layer : g.layers) {
        p.push_back(view(layer.kernels));
        p.push_back(view(layer.gamma));
    }
    p.push_back(view(g.projection));
    return p;
}

std::vector<ParamView> grad_views(LstmGrad& g) {
    std::vector<ParamView> p;
    for (auto& layer : g.layers) {
        p.push_back(view(layer.w_ih));
        p.push_back(view(layer.w_hh));
        p.push_back(view(layer.bias));
    }
    p.push_back(view(g.head_mu));
    p.push_back(view(g.head_mu_b));
    p.push_back(view(g.head_logvar));
    p.push_back(view(g.head_logvar_b));
    return p;
}

void add_symmetry_grads(const LayerStack& stack, double lambda, StackGrad& grad,
                        double& loss_accum) {
    if (lambda == 0.0) return;
    const auto sym = symmetry_loss_through_stack(stack);
    loss_accum += lambda * sym.value;
    for (std::size_t li = 0; li < grad.layers.size(); ++li)
        grad.layers[li].kernels += lambda * sym.kernel_grads[li];
}

}  // namespace

TrainResult train_supervised(const TrainingConfig& config, const std::vector<Sample>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("train_supervised: empty dataset");
    if (!(config.lr_start >= config.lr_end && config.lr_end > 0.0))
        throw std::invalid_argument("train_supervised: need lr_start >= lr_end > 0");
    const std::size_t n_in = dataset[0].input.size();
    const std::size_t n_out = dataset[0].target.size();

    TrainResult result;
    result.stack = make_stack(n_in, config.channels, n_out, config.n_layers,
                              config.kernel_len, config.activation, config.seed);
    result.stack.training = true;

    // seeded split + shuffling, independent of the weight-init stream
    Rng order_rng(Rng::derive_seed(config.seed, 1000));
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, order_rng);
    const std::size_t n_val = std::min(
        dataset.size() - 1,
        static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(dataset.size()))));
    std::vector<std::size_t> val_idx(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
    idx.resize(idx.size() - n_val);

    AdamState adam;
    auto params = stack_params(result.stack);
    adam.init(params);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(config.lr_start, config.lr_end, epoch, config.epochs);
        shuffle(idx, order_rng);

        double train_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t lo = 0; lo < idx.size(); lo += config.batch_size) {
            const std::size_t hi = std::min(idx.size(), lo + config.batch_size);
            const Tensor3 x = gather(dataset, idx, lo, hi, true);
            const Tensor3 y = gather(dataset, idx, lo, hi, false);

            ForwardCache cache;
            const Tensor3 pred = forward(result.stack, x, cache);
            const auto mse = mse_loss(pred, y);
            StackGrad grad = backward(result.stack, cache, mse.grad);

            double batch_loss = mse.value;
            add_symmetry_grads(result.stack, config.lambda_sym, grad, batch_loss);
            check_finite(batch_loss, epoch);
            train_loss += batch_loss;
            ++n_batches;

            auto gviews = grad_views(grad);
            adam_step(params, gviews, adam, lr);
        }
        train_loss /= static_cast<double>(std::max<std::size_t>(1, n_batches));

        double val_loss = 0.0;
        if (!val_idx.empty()) {
            result.stack.training = false;
            const Tensor3 xv = gather(dataset, val_idx, 0, val_idx.size(), true);
            const Tensor3 yv = gather(dataset, val_idx, 0, val_idx.size(), false);
            val_loss = mse_loss(forward(result.stack, xv), yv).value;
            result.stack.training = true;
            check_finite(val_loss, epoch);
        }
        result.history.push_back({epoch, train_loss, val_loss, lr});
    }
    result.stack.training = false;
    return result;
}

VaeTrainResult train_vae(const TrainingConfig& config,
                         const std::vector<std::vector<std::vector<double>>>& samples) {
    if (samples.empty()) throw std::invalid_argument("train_vae: empty dataset");
    const std::size_t n_ch = samples[0].size();

    VaeTrainResult result;
    result.encoder = make_lstm_encoder(n_ch, config.lstm_hidden, config.channels,
                                       Rng::derive_seed(config.seed, 2000));
    result.decoder = make_stack(config.channels, config.channels, n_ch, config.n_layers,
                                config.kernel_len, config.activation, config.seed);
    // latent feeds the decoder channels directly
    result.decoder.expansion = Eigen::MatrixXd::Identity(
        static_cast<Eigen::Index>(config.channels), static_cast<Eigen::Index>(config.channels));
    // with one latent per output the projection freezes to identity too, so
    // each latent channel owns one output and its filter stays interpretable
    const bool frozen_projection = config.channels == n_ch;
    if (frozen_projection)
        result.decoder.projection = Eigen::MatrixXd::Identity(
            static_cast<Eigen::Index>(n_ch), static_cast<Eigen::Index>(n_ch));
    result.encoder.training = true;
    result.decoder.training = true;

    Rng order_rng(Rng::derive_seed(config.seed, 1000));
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, order_rng);
    const std::size_t n_val = std::min(
        samples.size() - 1,
        static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(samples.size()))));
    std::vector<std::size_t> val_idx(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
    idx.resize(idx.size() - n_val);

    auto gather_y = [&](const std::vector<std::size_t>& which, std::size_t lo, std::size_t hi) {
        Tensor3 t(hi - lo, n_ch, samples[which[lo]][0].size());
        for (std::size_t s = lo; s < hi; ++s)
            for (std::size_t c = 0; c < n_ch; ++c)
                std::copy(samples[which[s]][c].begin(), samples[which[s]][c].end(),
                          t.row(s - lo, c));
        return t;
    };

    AdamState adam;
    // decoder expansion stays a frozen identity: the latent channels feed the
    // depthwise stack directly
    auto sp = stack_params(result.decoder);
    std::vector<ParamView> params(sp.begin() + 1, sp.end() - (frozen_projection ? 1 : 0));
    {
        auto lp = lstm_params(result.encoder);
        params.insert(params.end(), lp.begin(), lp.end());
    }
    adam.init(params);

    std::uint64_t draw = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(config.lr_start, config.lr_end, epoch, config.epochs);
        shuffle(idx, order_rng);

        double train_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t lo = 0; lo < idx.size(); lo += config.batch_size) {
            const std::size_t hi = std::min(idx.size(), lo + config.batch_size);
            const Tensor3 y = gather_y(idx, lo, hi);

            LstmCache enc_cache;
            auto [mu, logvar] =
                lstm_forward(result.encoder, y, enc_cache,
                             Rng::derive_seed(config.seed, 3000 + draw));
            auto [z, eps] =
                reparameterize(mu, logvar, Rng::derive_seed(config.seed, 4000 + draw));
            ++draw;

            ForwardCache dec_cache;
            const Tensor3 recon = forward(result.decoder, z, dec_cache);
            const auto mse = mse_loss(recon, y);
            const auto kl = kl_gaussian(mu, logvar);

            StackGrad dec_grad = backward(result.decoder, dec_cache, mse.grad);
            double batch_loss = mse.value + config.beta_kl * kl.value;
            add_symmetry_grads(result.decoder, config.lambda_sym, dec_grad, batch_loss);
            check_finite(batch_loss, epoch);
            train_loss += batch_loss;
            ++n_batches;

            // pathwise derivatives through z = mu + exp(logvar/2) eps
            Tensor3 dmu = dec_grad.input;
            Tensor3 dlogvar(mu.batch, mu.channels, mu.steps);
            for (std::size_t i = 0; i < dlogvar.size(); ++i)
                dlogvar.data[i] = dec_grad.input.data[i] * eps.data[i] * 0.5 *
                                  std::exp(0.5 * logvar.data[i]);
            for (std::size_t i = 0; i < dmu.size(); ++i) {
                dmu.data[i] += config.beta_kl * kl.dmu.data[i];
                dlogvar.data[i] += config.beta_kl * kl.dlogvar.data[i];
            }
            LstmGrad enc_grad = lstm_backward(result.encoder, enc_cache, dmu, dlogvar);

            auto dg = grad_views(dec_grad);
            std::vector<ParamView> gviews(
                dg.begin() + 1, dg.end() - (frozen_projection ? 1 : 0));  // skip frozen maps
            auto lg = grad_views(enc_grad);
            gviews.insert(gviews.end(), lg.begin(), lg.end());
            adam_step(params, gviews, adam, lr);
        }
        train_loss /= static_cast<double>(std::max<std::size_t>(1, n_batches));

        double val_loss = 0.0;
        if (!val_idx.empty()) {
            result.encoder.training = false;
            result.decoder.training = false;
            const Tensor3 yv = gather_y(val_idx, 0, val_idx.size());
            LstmCache cache;
            auto [mu, logvar] = lstm_forward(result.encoder, yv, cache, 0);
            // validation decodes the latent mean
            val_loss = mse_loss(forward(result.decoder, mu), yv).value;
            result.encoder.training = true;
            result.decoder.training = true;
            check_finite(val_loss, epoch);
        }
        result.history.push_back({epoch, train_loss, val_loss, lr});
    }
    result.encoder.training = false;
    result.decoder.training = false;
    return result;
}

void write_history_csv(const std::string& path, const std::vector<LossHistoryRow>& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "epoch,train_loss,val_loss,lr\n" << std::setprecision(17);
    for (const auto& row : history)
        out << row.epoch << "," << row.train_loss << "," << row.val_loss << "," << row.lr << "\n";
}

}  // namespace ccfir::nn
