#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ccfir::nn {

// Dense batch x channels x time array, time fastest.
struct Tensor3 {
    std::size_t batch = 0, channels = 0, steps = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(std::size_t b, std::size_t c, std::size_t t)
        : batch(b), channels(c), steps(t), data(b * c * t, 0.0) {}

    double& at(std::size_t b, std::size_t c, std::size_t t) {
        return data[(b * channels + c) * steps + t];
    }
    double at(std::size_t b, std::size_t c, std::size_t t) const {
        return data[(b * channels + c) * steps + t];
    }
    double* row(std::size_t b, std::size_t c) { return &data[(b * channels + c) * steps]; }
    const double* row(std::size_t b, std::size_t c) const {
        return &data[(b * channels + c) * steps];
    }
    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor3& o) const {
        return batch == o.batch && channels == o.channels && steps == o.steps;
    }
};

}  // namespace ccfir::nn
