#include "ccfir/collapse.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace ccfir {

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> fold_batchnorm(const nn::DepthwiseLayer& layer, double bn_eps,
                                   std::size_t channel, bool* mean_ok) {
    const auto c = static_cast<Eigen::Index>(channel);
    const double rv = layer.running_var(c);
    const double scale = layer.gamma(c) / std::sqrt(rv + bn_eps);
    if (mean_ok)
        *mean_ok = std::abs(layer.running_mean(c)) < 0.05 * std::sqrt(rv + bn_eps);
    std::vector<double> k(static_cast<std::size_t>(layer.kernels.cols()));
    for (std::size_t i = 0; i < k.size(); ++i)
        k[i] = scale * layer.kernels(c, static_cast<Eigen::Index>(i));
    return k;
}

CollapsedFilter collapse_stack(const nn::LayerStack& stack, double fs) {
    if (stack.training)
        throw std::invalid_argument("collapse_stack: stack must be in eval mode");
    if (stack.layers.empty())
        throw std::invalid_argument("collapse_stack: empty stack");

    const std::size_t n_ch = stack.channels();
    CollapsedFilter out;
    out.fs = fs;
    out.per_channel.resize(n_ch);
    out.per_channel_offset.assign(n_ch, 0.0);
    for (std::size_t c = 0; c < n_ch; ++c) {
        std::vector<double> w{1.0};
        double offset = 0.0;
        for (std::size_t li = 0; li < stack.layers.size(); ++li) {
            const auto folded = fold_batchnorm(stack.layers[li], stack.bn_eps, c);
            const auto& layer = stack.layers[li];
            const auto ci = static_cast<Eigen::Index>(c);
            const double scale =
                layer.gamma(ci) / std::sqrt(layer.running_var(ci) + stack.bn_eps);
            double dc_gain = 0.0;
            for (double tap : folded) dc_gain += tap;
            // a constant input offset passes through the convolution times the
            // dc gain; the mean subtraction adds its own constant
            offset = offset * dc_gain - scale * layer.running_mean(ci);
            w = convolve(w, folded);
        }
        out.per_channel[c] = std::move(w);
        out.per_channel_offset[c] = offset;
    }

    const std::size_t n_out = stack.outputs();
    const std::size_t n_in = stack.inputs();
    const std::size_t len = out.per_channel[0].size();
    out.end_to_end.assign(n_out, std::vector<std::vector<double>>(
                                     n_in, std::vector<double>(len, 0.0)));
    out.end_to_end_offset.assign(n_out, 0.0);
    for (std::size_t o = 0; o < n_out; ++o)
        for (std::size_t c = 0; c < n_ch; ++c) {
            const double proj =
                stack.projection(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(c));
            out.end_to_end_offset[o] += proj * out.per_channel_offset[c];
            for (std::size_t i = 0; i < n_in; ++i) {
                const double scale =
                    proj *
                    stack.expansion(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i));
                for (std::size_t t = 0; t < len; ++t)
                    out.end_to_end[o][i][t] += scale * out.per_channel[c][t];
            }
        }
    return out;
}

LinearityReport linearity_r2(nn::LayerStack& stack, const nn::Tensor3& batch) {
    if (batch.batch == 0) throw std::invalid_argument("linearity_r2: empty batch");
    const bool was_training = stack.training;
    stack.training = false;  // frozen statistics; no side effects
    nn::ForwardCache cache;
    nn::forward(stack, batch, cache);
    stack.training = was_training;

    LinearityReport report;
    for (std::size_t li = 0; li < stack.layers.size(); ++li) {
        const auto& lc = cache.layers[li];
        const auto& layer = stack.layers[li];
        // pre-activation is gamma * normalized
        double sxy = 0.0, sxx = 0.0, sy = 0.0, syy = 0.0;
        const std::size_t count = lc.output.size();
        for (std::size_t b = 0; b < lc.output.batch; ++b)
            for (std::size_t c = 0; c < lc.output.channels; ++c) {
                const double g = layer.gamma(static_cast<Eigen::Index>(c));
                const double* nrm = lc.normalized.row(b, c);
                const double* act = lc.output.row(b, c);
                for (std::size_t t = 0; t < lc.output.steps; ++t) {
                    const double x = g * nrm[t];
                    const double y = act[t];
                    sxy += x * y;
                    sxx += x * x;
                    sy += y;
                    syy += y * y;
                }
            }
        const double ss_tot = syy - sy * sy / static_cast<double>(count);
        if (ss_tot <= 0.0 || sxx == 0.0) {
            report.r2.push_back(1.0);
            report.degenerate.push_back(true);
            continue;
        }
        const double alpha = sxy / sxx;
        // SS_res = sum (y - alpha x)^2
        const double ss_res = syy - 2.0 * alpha * sxy + alpha * alpha * sxx;
        report.r2.push_back(1.0 - ss_res / ss_tot);
        report.degenerate.push_back(false);
    }
    double sum = 0.0;
    for (double r : report.r2) sum += r;
    report.mean_r2 = report.r2.empty() ? 0.0 : sum / static_cast<double>(report.r2.size());
    return report;
}

std::pair<double, std::vector<double>> symmetry_loss(const std::vector<double>& w) {
    const std::size_t n = w.size();
    double loss = 0.0;
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = w[i] - w[n - 1 - i];
        loss += d * d;
        grad[i] = 4.0 * d;  // 2d - 2*reverse(d), with reverse(d) = -d
    }
    return {loss, std::move(grad)};
}

SymmetryThroughStack symmetry_loss_through_stack(const nn::LayerStack& stack) {
    const std::size_t n_layers = stack.layers.size();
    const std::size_t n_ch = stack.channels();
    SymmetryThroughStack result;
    result.kernel_grads.resize(n_layers);
    for (std::size_t li = 0; li < n_layers; ++li)
        result.kernel_grads[li] = Eigen::MatrixXd::Zero(stack.layers[li].kernels.rows(),
                                                        stack.layers[li].kernels.cols());

    for (std::size_t c = 0; c < n_ch; ++c) {
        std::vector<std::vector<double>> kernels(n_layers);
        for (std::size_t li = 0; li < n_layers; ++li) {
            const auto& km = stack.layers[li].kernels;
            kernels[li].resize(static_cast<std::size_t>(km.cols()));
            for (std::size_t k = 0; k < kernels[li].size(); ++k)
                kernels[li][k] = km(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k));
        }
        // prefix[i] = k_0 * ... * k_{i-1}; suffix[i] = k_i * ... * k_{M-1}
        std::vector<std::vector<double>> prefix(n_layers + 1), suffix(n_layers + 1);
        prefix[0] = {1.0};
        for (std::size_t i = 0; i < n_layers; ++i) prefix[i + 1] = convolve(prefix[i], kernels[i]);
        suffix[n_layers] = {1.0};
        for (std::size_t i = n_layers; i-- > 0;) suffix[i] = convolve(kernels[i], suffix[i + 1]);

        const auto& w = prefix[n_layers];
        auto [loss, gw] = symmetry_loss(w);
        result.value += loss;

        for (std::size_t li = 0; li < n_layers; ++li) {
            const auto rest = convolve(prefix[li], suffix[li + 1]);
            auto& kg = result.kernel_grads[li];
            for (std::size_t k = 0; k < kernels[li].size(); ++k) {
                double acc = 0.0;
                for (std::size_t m = 0; m < rest.size(); ++m) acc += gw[m + k] * rest[m];
                kg(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) += acc;
            }
        }
    }
    return result;
}

void write_linearity_csv(const std::string& path, const LinearityReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "layer,r2\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.r2.size(); ++i) out << i << "," << report.r2[i] << "\n";
}

}  // namespace ccfir
