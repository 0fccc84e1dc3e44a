#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ccfir/nn/tensor.hpp"

namespace ccfir::nn {

// z = mu + exp(logvar/2) * eps with seeded standard-normal eps.
// Returns the sample and the eps draws (the pathwise derivative needs them).
std::pair<Tensor3, Tensor3> reparameterize(const Tensor3& mu, const Tensor3& logvar,
                                           std::uint64_t seed);

// KL(N(mu, exp(logvar)) || N(0, 1)) summed over elements, averaged over batch.
// Gradients match that normalization.
struct KlResult {
    double value = 0.0;
    Tensor3 dmu, dlogvar;
};
KlResult kl_gaussian(const Tensor3& mu, const Tensor3& logvar);

// Mean squared error and its gradient w.r.t. pred.
struct MseResult {
    double value = 0.0;
    Tensor3 grad;
};
MseResult mse_loss(const Tensor3& pred, const Tensor3& target);

}  // namespace ccfir::nn
