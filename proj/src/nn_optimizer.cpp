#include "ccfir/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace ccfir::nn {

void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: parameter/gradient block count mismatch");
    if (state.m.size() != params.size()) state.init(params);

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t blk = 0; blk < params.size(); ++blk) {
        if (params[blk].size != grads[blk].size)
            throw std::invalid_argument("adam_step: block shape mismatch");
        auto& m = state.m[blk];
        auto& v = state.v[blk];
        for (std::size_t i = 0; i < params[blk].size; ++i) {
            const double g = grads[blk].data[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            params[blk].data[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

double lr_schedule(double lr_start, double lr_end, std::size_t epoch, std::size_t epochs) {
    if (epochs <= 1) return lr_start;
    const double frac = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return lr_start * std::pow(lr_end / lr_start, frac);
}

}  // namespace ccfir::nn
