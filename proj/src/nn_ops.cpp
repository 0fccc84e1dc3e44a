#include "ccfir/nn/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "ccfir/rng.hpp"

namespace ccfir::nn {

std::pair<Tensor3, Tensor3> reparameterize(const Tensor3& mu, const Tensor3& logvar,
                                           std::uint64_t seed) {
    if (!mu.same_shape(logvar)) throw std::invalid_argument("reparameterize: shape mismatch");
    Rng rng(seed);
    Tensor3 z(mu.batch, mu.channels, mu.steps);
    Tensor3 eps(mu.batch, mu.channels, mu.steps);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        eps.data[i] = rng.normal();
        z.data[i] = mu.data[i] + std::exp(0.5 * logvar.data[i]) * eps.data[i];
    }
    return {std::move(z), std::move(eps)};
}

KlResult kl_gaussian(const Tensor3& mu, const Tensor3& logvar) {
    if (!mu.same_shape(logvar)) throw std::invalid_argument("kl_gaussian: shape mismatch");
    const double inv_batch = 1.0 / static_cast<double>(mu.batch);
    KlResult r;
    r.dmu = Tensor3(mu.batch, mu.channels, mu.steps);
    r.dlogvar = Tensor3(mu.batch, mu.channels, mu.steps);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double m = mu.data[i];
        const double lv = logvar.data[i];
        r.value += 0.5 * (std::exp(lv) + m * m - 1.0 - lv);
        r.dmu.data[i] = m * inv_batch;
        r.dlogvar.data[i] = 0.5 * (std::exp(lv) - 1.0) * inv_batch;
    }
    r.value *= inv_batch;
    return r;
}

MseResult mse_loss(const Tensor3& pred, const Tensor3& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("mse_loss: shape mismatch");
    const double inv_count = 1.0 / static_cast<double>(pred.size());
    MseResult r;
    r.grad = Tensor3(pred.batch, pred.channels, pred.steps);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        r.value += d * d * inv_count;
        r.grad.data[i] = 2.0 * d * inv_count;
    }
    return r;
}

}  // namespace ccfir::nn
