#pragma once

#include <cstddef>
#include <vector>

namespace ccfir::nn {

// Flat view onto one parameter block (an Eigen matrix's storage).
struct ParamView {
    double* data = nullptr;
    std::size_t size = 0;
};

struct AdamState {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t step = 0;
    std::vector<std::vector<double>> m, v;  // per block

    void init(const std::vector<ParamView>& params) {
        m.clear();
        v.clear();
        for (const auto& p : params) {
            m.emplace_back(p.size, 0.0);
            v.emplace_back(p.size, 0.0);
        }
        step = 0;
    }
};

// Bias-corrected Adam update, in place.
void adam_step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads,
               AdamState& state, double lr);

// Geometric interpolation from lr_start (epoch 0) to lr_end (last epoch).
double lr_schedule(double lr_start, double lr_end, std::size_t epoch, std::size_t epochs);

}  // namespace ccfir::nn
