#include "ccfir/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "ccfir/rng.hpp"

namespace ccfir::nn {

Eigen::MatrixXd xavier_init(std::size_t fan_in, std::size_t fan_out,
                            std::size_t rows, std::size_t cols, std::uint64_t seed) {
    if (fan_in < 1 || fan_out < 1) throw std::invalid_argument("xavier_init: fans must be >= 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = rng.uniform(-bound, bound);
    return m;
}

LayerStack make_stack(std::size_t inputs, std::size_t channels, std::size_t outputs,
                      std::size_t n_layers, std::size_t kernel_len,
                      Activation activation, std::uint64_t seed) {
    if (channels == 0 || inputs == 0 || outputs == 0 || n_layers == 0 || kernel_len == 0)
        throw std::invalid_argument("make_stack: all dimensions must be >= 1");
    LayerStack stack;
    stack.expansion = xavier_init(inputs, channels, channels, inputs,
                                  Rng::derive_seed(seed, 0));
    for (std::size_t i = 0; i < n_layers; ++i) {
        DepthwiseLayer layer;
        layer.kernels = xavier_init(kernel_len, kernel_len, channels, kernel_len,
                                    Rng::derive_seed(seed, 1 + i));
        layer.gamma = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(channels));
        layer.running_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(channels));
        layer.running_var = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(channels));
        layer.activation = activation;
        stack.layers.push_back(std::move(layer));
    }
    stack.projection = xavier_init(channels, outputs, outputs, channels,
                                   Rng::derive_seed(seed, 1 + n_layers));
    return stack;
}

namespace {

// z[b,c,t] = sum_k w(c,k) x[b,c,t-k], left-padded with zeros.
void causal_conv(const Eigen::MatrixXd& kernels, const Tensor3& x, Tensor3& z) {
    const std::size_t p = static_cast<std::size_t>(kernels.cols());
    for (std::size_t b = 0; b < x.batch; ++b) {
        for (std::size_t c = 0; c < x.channels; ++c) {
            const double* in = x.row(b, c);
            double* out = z.row(b, c);
            for (std::size_t t = 0; t < x.steps; ++t) {
                double acc = 0.0;
                const std::size_t k_max = std::min(p - 1, t);
                for (std::size_t k = 0; k <= k_max; ++k)
                    acc += kernels(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) *
                           in[t - k];
                out[t] = acc;
            }
        }
    }
}

Tensor3 run_forward(LayerStack* mutable_stack, const LayerStack& stack,
                    const Tensor3& batch, ForwardCache* cache) {
    if (batch.batch == 0 || batch.steps == 0)
        throw std::invalid_argument("forward: empty batch");
    if (batch.channels != stack.inputs())
        throw std::invalid_argument("forward: input channel count mismatch");

    const std::size_t n_ch = stack.channels();
    const bool train = stack.training;
    if (cache) {
        cache->input = batch;
        cache->layers.clear();
        cache->train_mode = train;
    }

    // expansion: pointwise mix of input channels
    Tensor3 h(batch.batch, n_ch, batch.steps);
    for (std::size_t b = 0; b < batch.batch; ++b)
        for (std::size_t c = 0; c < n_ch; ++c) {
            double* out = h.row(b, c);
            for (std::size_t ci = 0; ci < batch.channels; ++ci) {
                const double w = stack.expansion(static_cast<Eigen::Index>(c),
                                                 static_cast<Eigen::Index>(ci));
                const double* in = batch.row(b, ci);
                for (std::size_t t = 0; t < batch.steps; ++t) out[t] += w * in[t];
            }
        }
    if (cache) cache->expanded = h;

    const double m_count = static_cast<double>(batch.batch * batch.steps);
    for (std::size_t li = 0; li < stack.layers.size(); ++li) {
        const auto& layer = stack.layers[li];
        LayerCache lc;
        if (cache) lc.input = h;

        Tensor3 z(h.batch, h.channels, h.steps);
        causal_conv(layer.kernels, h, z);

        Eigen::VectorXd mean(static_cast<Eigen::Index>(n_ch));
        Eigen::VectorXd var(static_cast<Eigen::Index>(n_ch));
        if (train) {
            for (std::size_t c = 0; c < n_ch; ++c) {
                double s = 0.0;
                for (std::size_t b = 0; b < z.batch; ++b) {
                    const double* row = z.row(b, c);
                    for (std::size_t t = 0; t < z.steps; ++t) s += row[t];
                }
                const double mu = s / m_count;
                double s2 = 0.0;
                for (std::size_t b = 0; b < z.batch; ++b) {
                    const double* row = z.row(b, c);
                    for (std::size_t t = 0; t < z.steps; ++t) s2 += (row[t] - mu) * (row[t] - mu);
                }
                mean(static_cast<Eigen::Index>(c)) = mu;
                var(static_cast<Eigen::Index>(c)) = s2 / m_count;
            }
            if (mutable_stack) {
                auto& ml = mutable_stack->layers[li];
                ml.running_mean = (1.0 - stack.bn_momentum) * ml.running_mean +
                                  stack.bn_momentum * mean;
                ml.running_var = (1.0 - stack.bn_momentum) * ml.running_var +
                                 stack.bn_momentum * var;
            }
        } else {
            mean = layer.running_mean;
            var = layer.running_var;
        }

        Tensor3 normalized(z.batch, z.channels, z.steps);
        Tensor3 activated(z.batch, z.channels, z.steps);
        for (std::size_t c = 0; c < n_ch; ++c) {
            const double mu = mean(static_cast<Eigen::Index>(c));
            const double inv_std = 1.0 / std::sqrt(var(static_cast<Eigen::Index>(c)) + stack.bn_eps);
            const double g = layer.gamma(static_cast<Eigen::Index>(c));
            for (std::size_t b = 0; b < z.batch; ++b) {
                const double* zin = z.row(b, c);
                double* nrm = normalized.row(b, c);
                double* act = activated.row(b, c);
                for (std::size_t t = 0; t < z.steps; ++t) {
                    nrm[t] = (zin[t] - mu) * inv_std;
                    const double pre = g * nrm[t];
                    act[t] = layer.activation == Activation::Tanh ? std::tanh(pre) : pre;
                }
            }
        }

        if (cache) {
            lc.pre_bn = std::move(z);
            lc.normalized = normalized;
            lc.output = activated;
            lc.mean = mean;
            lc.var = var;
            cache->layers.push_back(std::move(lc));
        }
        h = std::move(activated);
    }

    // projection to output channels
    Tensor3 out(batch.batch, stack.outputs(), batch.steps);
    for (std::size_t b = 0; b < batch.batch; ++b)
        for (std::size_t n = 0; n < stack.outputs(); ++n) {
            double* orow = out.row(b, n);
            for (std::size_t c = 0; c < n_ch; ++c) {
                const double w = stack.projection(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(c));
                const double* in = h.row(b, c);
                for (std::size_t t = 0; t < batch.steps; ++t) orow[t] += w * in[t];
            }
        }
    return out;
}

}  // namespace

Tensor3 forward(LayerStack& stack, const Tensor3& batch, ForwardCache& cache) {
    return run_forward(&stack, stack, batch, &cache);
}

Tensor3 forward(const LayerStack& stack, const Tensor3& batch) {
    return run_forward(nullptr, stack, batch, nullptr);
}

StackGrad backward(const LayerStack& stack, const ForwardCache& cache,
                   const Tensor3& output_grad) {
    if (cache.layers.size() != stack.layers.size())
        throw std::invalid_argument("backward: cache does not match stack");
    if (!cache.train_mode)
        throw std::invalid_argument("backward: cache must come from a training-mode forward");

    const std::size_t n_ch = stack.channels();
    const std::size_t n_b = cache.input.batch;
    const std::size_t n_t = cache.input.steps;
    const double m_count = static_cast<double>(n_b * n_t);

    StackGrad grad;
    grad.expansion = Eigen::MatrixXd::Zero(stack.expansion.rows(), stack.expansion.cols());
    grad.projection = Eigen::MatrixXd::Zero(stack.projection.rows(), stack.projection.cols());
    grad.layers.resize(stack.layers.size());

    // projection backward
    const Tensor3& last = stack.layers.empty() ? cache.expanded : cache.layers.back().output;
    Tensor3 dh(n_b, n_ch, n_t);
    for (std::size_t b = 0; b < n_b; ++b)
        for (std::size_t n = 0; n < stack.outputs(); ++n) {
            const double* gout = output_grad.row(b, n);
            for (std::size_t c = 0; c < n_ch; ++c) {
                const double* in = last.row(b, c);
                double acc = 0.0;
                const double w = stack.projection(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(c));
                double* drow = dh.row(b, c);
                for (std::size_t t = 0; t < n_t; ++t) {
                    acc += gout[t] * in[t];
                    drow[t] += w * gout[t];
                }
                grad.projection(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) += acc;
            }
        }

    for (std::size_t li = stack.layers.size(); li-- > 0;) {
        const auto& layer = stack.layers[li];
        const auto& lc = cache.layers[li];
        auto& lg = grad.layers[li];
        lg.kernels = Eigen::MatrixXd::Zero(layer.kernels.rows(), layer.kernels.cols());
        lg.gamma = Eigen::VectorXd::Zero(layer.gamma.size());

        // activation backward
        Tensor3 dpre(n_b, n_ch, n_t);
        if (layer.activation == Activation::Tanh) {
            for (std::size_t i = 0; i < dpre.size(); ++i) {
                const double y = lc.output.data[i];
                dpre.data[i] = dh.data[i] * (1.0 - y * y);
            }
        } else {
            dpre.data = dh.data;
        }

        // batch-norm backward (batch statistics)
        Tensor3 dz(n_b, n_ch, n_t);
        for (std::size_t c = 0; c < n_ch; ++c) {
            const double g = layer.gamma(static_cast<Eigen::Index>(c));
            const double inv_std =
                1.0 / std::sqrt(lc.var(static_cast<Eigen::Index>(c)) + stack.bn_eps);
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, dgamma = 0.0;
            for (std::size_t b = 0; b < n_b; ++b) {
                const double* dp = dpre.row(b, c);
                const double* xh = lc.normalized.row(b, c);
                for (std::size_t t = 0; t < n_t; ++t) {
                    dgamma += dp[t] * xh[t];
                    const double dxhat = dp[t] * g;
                    sum_dxhat += dxhat;
                    sum_dxhat_xhat += dxhat * xh[t];
                }
            }
            lg.gamma(static_cast<Eigen::Index>(c)) = dgamma;
            for (std::size_t b = 0; b < n_b; ++b) {
                const double* dp = dpre.row(b, c);
                const double* xh = lc.normalized.row(b, c);
                double* dzr = dz.row(b, c);
                for (std::size_t t = 0; t < n_t; ++t) {
                    const double dxhat = dp[t] * g;
                    dzr[t] = inv_std *
                             (dxhat - sum_dxhat / m_count - xh[t] * sum_dxhat_xhat / m_count);
                }
            }
        }

        // convolution backward
        const std::size_t p = static_cast<std::size_t>(layer.kernels.cols());
        Tensor3 dinput(n_b, n_ch, n_t);
        for (std::size_t c = 0; c < n_ch; ++c) {
            for (std::size_t b = 0; b < n_b; ++b) {
                const double* in = lc.input.row(b, c);
                const double* dzr = dz.row(b, c);
                double* din = dinput.row(b, c);
                for (std::size_t k = 0; k < p; ++k) {
                    double acc = 0.0;
                    for (std::size_t t = k; t < n_t; ++t) acc += dzr[t] * in[t - k];
                    lg.kernels(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) += acc;
                }
                for (std::size_t t = 0; t < n_t; ++t) {
                    double acc = 0.0;
                    const std::size_t k_max = std::min(p - 1, n_t - 1 - t);
                    for (std::size_t k = 0; k <= k_max; ++k)
                        acc += layer.kernels(static_cast<Eigen::Index>(c),
                                             static_cast<Eigen::Index>(k)) *
                               dzr[t + k];
                    din[t] = acc;
                }
            }
        }
        dh = std::move(dinput);
    }

    // expansion backward
    grad.input = Tensor3(n_b, stack.inputs(), n_t);
    for (std::size_t b = 0; b < n_b; ++b)
        for (std::size_t c = 0; c < n_ch; ++c) {
            const double* drow = dh.row(b, c);
            for (std::size_t ci = 0; ci < stack.inputs(); ++ci) {
                const double* in = cache.input.row(b, ci);
                const double w = stack.expansion(static_cast<Eigen::Index>(c),
                                                 static_cast<Eigen::Index>(ci));
                double* gin = grad.input.row(b, ci);
                double acc = 0.0;
                for (std::size_t t = 0; t < n_t; ++t) {
                    acc += drow[t] * in[t];
                    gin[t] += w * drow[t];
                }
                grad.expansion(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(ci)) += acc;
            }
        }
    return grad;
}

}  // namespace ccfir::nn
