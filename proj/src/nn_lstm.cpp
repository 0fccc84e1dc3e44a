#include "ccfir/nn/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ccfir/nn/layers.hpp"
#include "ccfir/rng.hpp"

namespace ccfir::nn {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
constexpr double kLogvarClamp = 20.0;
}  // namespace

LstmEncoder make_lstm_encoder(std::size_t inputs, std::size_t hidden, std::size_t latent,
                              std::uint64_t seed) {
    LstmEncoder enc;
    std::size_t in_dim = inputs;
    for (std::size_t l = 0; l < 2; ++l) {
        LstmLayerParams p;
        p.w_ih = xavier_init(in_dim, hidden, 4 * hidden, in_dim, Rng::derive_seed(seed, 10 + l));
        p.w_hh = xavier_init(hidden, hidden, 4 * hidden, hidden, Rng::derive_seed(seed, 20 + l));
        p.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(4 * hidden));
        enc.layers.push_back(std::move(p));
        in_dim = hidden;
    }
    enc.head_mu = xavier_init(hidden, latent, latent, hidden, Rng::derive_seed(seed, 30));
    enc.head_logvar = xavier_init(hidden, latent, latent, hidden, Rng::derive_seed(seed, 31));
    enc.head_mu_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(latent));
    enc.head_logvar_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(latent));
    return enc;
}

std::pair<Tensor3, Tensor3> lstm_forward(const LstmEncoder& enc, const Tensor3& batch,
                                         LstmCache& cache, std::uint64_t dropout_seed) {
    if (batch.steps == 0 || batch.batch == 0)
        throw std::invalid_argument("lstm_forward: empty batch");
    if (batch.channels != enc.inputs())
        throw std::invalid_argument("lstm_forward: input width mismatch");

    const std::size_t h_dim = enc.hidden();
    const std::size_t n_b = batch.batch;
    const std::size_t n_t = batch.steps;

    cache.input = batch;
    cache.layers.clear();
    cache.train_mode = enc.training;

    Rng drop_rng(dropout_seed);
    Tensor3 layer_in = batch;
    for (std::size_t li = 0; li < enc.layers.size(); ++li) {
        const auto& p = enc.layers[li];
        LstmCache::Layer lc;
        lc.input = layer_in;
        lc.gate_i = Tensor3(n_b, h_dim, n_t);
        lc.gate_f = Tensor3(n_b, h_dim, n_t);
        lc.gate_g = Tensor3(n_b, h_dim, n_t);
        lc.gate_o = Tensor3(n_b, h_dim, n_t);
        lc.cell = Tensor3(n_b, h_dim, n_t);
        lc.cell_tanh = Tensor3(n_b, h_dim, n_t);
        lc.hidden = Tensor3(n_b, h_dim, n_t);

        const std::size_t in_dim = layer_in.channels;
        Eigen::VectorXd x_t(static_cast<Eigen::Index>(in_dim));
        Eigen::VectorXd h_prev(static_cast<Eigen::Index>(h_dim));
        Eigen::VectorXd c_prev(static_cast<Eigen::Index>(h_dim));
        for (std::size_t b = 0; b < n_b; ++b) {
            h_prev.setZero();
            c_prev.setZero();
            for (std::size_t t = 0; t < n_t; ++t) {
                for (std::size_t c = 0; c < in_dim; ++c)
                    x_t(static_cast<Eigen::Index>(c)) = layer_in.at(b, c, t);
                const Eigen::VectorXd pre = p.w_ih * x_t + p.w_hh * h_prev + p.bias;
                for (std::size_t u = 0; u < h_dim; ++u) {
                    const auto ui = static_cast<Eigen::Index>(u);
                    const auto hh = static_cast<Eigen::Index>(h_dim);
                    const double gi = sigmoid(pre(ui));
                    const double gf = sigmoid(pre(ui + hh));
                    const double gg = std::tanh(pre(ui + 2 * hh));
                    const double go = sigmoid(pre(ui + 3 * hh));
                    const double c_new = gf * c_prev(ui) + gi * gg;
                    const double ct = std::tanh(c_new);
                    lc.gate_i.at(b, u, t) = gi;
                    lc.gate_f.at(b, u, t) = gf;
                    lc.gate_g.at(b, u, t) = gg;
                    lc.gate_o.at(b, u, t) = go;
                    lc.cell.at(b, u, t) = c_new;
                    lc.cell_tanh.at(b, u, t) = ct;
                    lc.hidden.at(b, u, t) = go * ct;
                    c_prev(ui) = c_new;
                    h_prev(ui) = go * ct;
                }
            }
        }

        Tensor3 layer_out = lc.hidden;
        // inverted dropout on all but the last layer's output
        if (enc.training && enc.dropout > 0.0 && li + 1 < enc.layers.size()) {
            lc.dropout_mask = Tensor3(n_b, h_dim, n_t);
            const double keep = 1.0 - enc.dropout;
            for (std::size_t i = 0; i < layer_out.size(); ++i) {
                const double m = drop_rng.uniform() < keep ? 1.0 / keep : 0.0;
                lc.dropout_mask.data[i] = m;
                layer_out.data[i] *= m;
            }
        }
        cache.layers.push_back(std::move(lc));
        layer_in = std::move(layer_out);
    }
    cache.top_hidden = layer_in;

    const std::size_t l_dim = enc.latent();
    Tensor3 mu(n_b, l_dim, n_t);
    Tensor3 logvar(n_b, l_dim, n_t);
    cache.logvar_raw = Tensor3(n_b, l_dim, n_t);
    for (std::size_t b = 0; b < n_b; ++b)
        for (std::size_t l = 0; l < l_dim; ++l) {
            double* mrow = mu.row(b, l);
            double* vrow = logvar.row(b, l);
            double* rrow = cache.logvar_raw.row(b, l);
            for (std::size_t t = 0; t < n_t; ++t) {
                double am = enc.head_mu_b(static_cast<Eigen::Index>(l));
                double av = enc.head_logvar_b(static_cast<Eigen::Index>(l));
                for (std::size_t u = 0; u < h_dim; ++u) {
                    const double h = cache.top_hidden.at(b, u, t);
                    am += enc.head_mu(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(u)) * h;
                    av += enc.head_logvar(static_cast<Eigen::Index>(l),
                                          static_cast<Eigen::Index>(u)) * h;
                }
                mrow[t] = am;
                rrow[t] = av;
                vrow[t] = std::clamp(av, -kLogvarClamp, kLogvarClamp);
            }
        }
    return {std::move(mu), std::move(logvar)};
}

LstmGrad lstm_backward(const LstmEncoder& enc, const LstmCache& cache,
                       const Tensor3& dmu, const Tensor3& dlogvar) {
    const std::size_t h_dim = enc.hidden();
    const std::size_t l_dim = enc.latent();
    const std::size_t n_b = cache.input.batch;
    const std::size_t n_t = cache.input.steps;

    LstmGrad grad;
    grad.head_mu = Eigen::MatrixXd::Zero(enc.head_mu.rows(), enc.head_mu.cols());
    grad.head_logvar = Eigen::MatrixXd::Zero(enc.head_logvar.rows(), enc.head_logvar.cols());
    grad.head_mu_b = Eigen::VectorXd::Zero(enc.head_mu_b.size());
    grad.head_logvar_b = Eigen::VectorXd::Zero(enc.head_logvar_b.size());
    grad.layers.resize(enc.layers.size());
    for (std::size_t li = 0; li < enc.layers.size(); ++li) {
        grad.layers[li].w_ih =
            Eigen::MatrixXd::Zero(enc.layers[li].w_ih.rows(), enc.layers[li].w_ih.cols());
        grad.layers[li].w_hh =
            Eigen::MatrixXd::Zero(enc.layers[li].w_hh.rows(), enc.layers[li].w_hh.cols());
        grad.layers[li].bias = Eigen::VectorXd::Zero(enc.layers[li].bias.size());
    }

    // heads backward into the top hidden sequence
    Tensor3 dtop(n_b, h_dim, n_t);
    for (std::size_t b = 0; b < n_b; ++b)
        for (std::size_t l = 0; l < l_dim; ++l) {
            const double* dm = dmu.row(b, l);
            const double* dv = dlogvar.row(b, l);
            const double* raw = cache.logvar_raw.row(b, l);
            for (std::size_t t = 0; t < n_t; ++t) {
                const double dvc = std::abs(raw[t]) < kLogvarClamp ? dv[t] : 0.0;
                grad.head_mu_b(static_cast<Eigen::Index>(l)) += dm[t];
                grad.head_logvar_b(static_cast<Eigen::Index>(l)) += dvc;
                for (std::size_t u = 0; u < h_dim; ++u) {
                    const double h = cache.top_hidden.at(b, u, t);
                    grad.head_mu(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(u)) +=
                        dm[t] * h;
                    grad.head_logvar(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(u)) +=
                        dvc * h;
                    dtop.at(b, u, t) +=
                        dm[t] * enc.head_mu(static_cast<Eigen::Index>(l),
                                            static_cast<Eigen::Index>(u)) +
                        dvc * enc.head_logvar(static_cast<Eigen::Index>(l),
                                              static_cast<Eigen::Index>(u));
                }
            }
        }

    // BPTT through the layers, top down
    Tensor3 dout = std::move(dtop);
    for (std::size_t li = enc.layers.size(); li-- > 0;) {
        const auto& p = enc.layers[li];
        const auto& lc = cache.layers[li];
        auto& lg = grad.layers[li];
        const std::size_t in_dim = lc.input.channels;

        if (lc.dropout_mask.size() > 0)
            for (std::size_t i = 0; i < dout.size(); ++i)
                dout.data[i] *= lc.dropout_mask.data[i];

        Tensor3 dinput(n_b, in_dim, n_t);
        Eigen::VectorXd dh(static_cast<Eigen::Index>(h_dim));
        Eigen::VectorXd dc(static_cast<Eigen::Index>(h_dim));
        Eigen::VectorXd dpre(static_cast<Eigen::Index>(4 * h_dim));
        Eigen::VectorXd x_t(static_cast<Eigen::Index>(in_dim));
        Eigen::VectorXd h_prev(static_cast<Eigen::Index>(h_dim));
        for (std::size_t b = 0; b < n_b; ++b) {
            dh.setZero();
            dc.setZero();
            for (std::size_t t = n_t; t-- > 0;) {
                for (std::size_t u = 0; u < h_dim; ++u)
                    dh(static_cast<Eigen::Index>(u)) += dout.at(b, u, t);
                for (std::size_t u = 0; u < h_dim; ++u) {
                    const auto ui = static_cast<Eigen::Index>(u);
                    const auto hh = static_cast<Eigen::Index>(h_dim);
                    const double gi = lc.gate_i.at(b, u, t);
                    const double gf = lc.gate_f.at(b, u, t);
                    const double gg = lc.gate_g.at(b, u, t);
                    const double go = lc.gate_o.at(b, u, t);
                    const double ct = lc.cell_tanh.at(b, u, t);
                    const double c_prev = t > 0 ? lc.cell.at(b, u, t - 1) : 0.0;

                    const double dgo = dh(ui) * ct;
                    double dcell = dc(ui) + dh(ui) * go * (1.0 - ct * ct);
                    const double dgf = dcell * c_prev;
                    const double dgi = dcell * gg;
                    const double dgg = dcell * gi;
                    dc(ui) = dcell * gf;

                    dpre(ui) = dgi * gi * (1.0 - gi);
                    dpre(ui + hh) = dgf * gf * (1.0 - gf);
                    dpre(ui + 2 * hh) = dgg * (1.0 - gg * gg);
                    dpre(ui + 3 * hh) = dgo * go * (1.0 - go);
                }
                for (std::size_t c = 0; c < in_dim; ++c)
                    x_t(static_cast<Eigen::Index>(c)) = lc.input.at(b, c, t);
                if (t > 0)
                    for (std::size_t u = 0; u < h_dim; ++u)
                        h_prev(static_cast<Eigen::Index>(u)) = lc.hidden.at(b, u, t - 1);
                else
                    h_prev.setZero();

                lg.w_ih.noalias() += dpre * x_t.transpose();
                lg.w_hh.noalias() += dpre * h_prev.transpose();
                lg.bias += dpre;

                dh.noalias() = p.w_hh.transpose() * dpre;  // into h_{t-1}
                const Eigen::VectorXd dx = p.w_ih.transpose() * dpre;
                for (std::size_t c = 0; c < in_dim; ++c)
                    dinput.at(b, c, t) = dx(static_cast<Eigen::Index>(c));
            }
        }
        dout = std::move(dinput);
    }
    return grad;
}

}  // namespace ccfir::nn
