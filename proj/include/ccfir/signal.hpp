#pragma once

#include <cstdint>
#include <vector>

#include "ccfir/time_series.hpp"

namespace ccfir {

// w[k] = 0.54 - 0.46 cos(2 pi k / (n-1)); n = 1 degenerates to [1].
std::vector<double> hamming_window(std::size_t n);

// One-sided PSD of the whole record, rectangular window, density scaling.
// sum(psd) * df equals the signal mean square.
Spectrum periodogram_psd(const TimeSeries& ts);

// Averaged modified periodogram, Hamming window, density scaling.
// Yields window_len/2 + 1 bins.
Spectrum welch_psd(const TimeSeries& ts, std::size_t window_len, double overlap);

// Cross-spectral density; welch_cpsd(x, x) reduces to welch_psd(x).
ComplexSpectrum welch_cpsd(const TimeSeries& x, const TimeSeries& y,
                           std::size_t window_len, double overlap);

// Least-squares polynomial smoothing; interior points use fixed convolution
// coefficients, edges refit on the truncated asymmetric window.
std::vector<double> savgol_smooth(const std::vector<double>& values,
                                  std::size_t window, std::size_t order);

// S(f) = sigma2 / |1 - sum_k w[k-1] exp(-2 pi i f k)|^2, f normalized in [0, 0.5].
// weights[k-1] multiplies lag k of the AR recursion.
double ar_spectral_density(const std::vector<double>& weights, double sigma2, double f);

// Rational-rate resampling: zero-stuff by up, Kaiser-windowed-sinc lowpass at
// min(pi/up, pi/down) (>= 60 dB stopband), keep every down-th sample.
// Group delay of the linear-phase filter is compensated.
TimeSeries resample(const TimeSeries& ts, std::size_t up, std::size_t down);

}  // namespace ccfir
