#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace ccfir::detail {

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("rfft: empty input");
    const std::size_t n = x.size();
    std::vector<double> in(x);
    std::vector<std::complex<double>> out(n / 2 + 1);

    // FFTW planning is not thread-safe.
    static std::mutex plan_mutex;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("rfft: fftw plan failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace ccfir::detail
