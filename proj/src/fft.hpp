#pragma once

#include <complex>
#include <vector>

namespace ccfir::detail {

// Real-to-complex FFT, n/2+1 output bins. Backed by FFTW.
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

}  // namespace ccfir::detail
