#pragma once

#include <vector>

#include "ccfir/time_series.hpp"

namespace ccfir {

// One biquad: H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

struct IirCascade {
    std::vector<Biquad> sections;
    double fs = 1.0;

    bool stable() const;  // all poles strictly inside the unit circle
    std::complex<double> response_at(double freq_hz) const;
};

// Chebyshev type II bandpass: analog lowpass prototype -> analog bandpass
// transform -> bilinear transform with prewarped band edges.
IirCascade cheby2_bandpass(std::size_t order, double atten_db,
                           double f_lo, double f_hi, double fs);

// Causal direct-form-II-transposed cascade filtering, zero initial state.
TimeSeries iir_filter(const IirCascade& cascade, const TimeSeries& ts);

}  // namespace ccfir
