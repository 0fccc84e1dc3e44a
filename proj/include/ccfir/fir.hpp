#pragma once

#include <string>
#include <vector>

#include "ccfir/time_series.hpp"

namespace ccfir {

struct FirFilter {
    std::vector<double> taps;  // impulse response w[0..p-1]
    double fs = 1.0;

    std::size_t order() const { return taps.size(); }
};

// One band of a piecewise desired response on the normalized axis f = w/pi.
// Desired amplitude inside the band: D(f) = d_slope * f + d_intercept.
struct BandSpec {
    double f_a = 0.0;   // normalized, in [0, 1]
    double f_b = 1.0;   // f_a < f_b
    double weight = 1.0;
    double d_slope = 0.0;
    double d_intercept = 0.0;
};

// q(n) = (1/pi) int_0^pi W(w) cos(n w) dw, closed form per constant-weight band.
double lsfir_q(const std::vector<BandSpec>& bands, std::size_t n);

// b(k) = (1/pi) int_0^pi W(w) D(w) cos(k w) dw, closed form per band with
// linear D.
double lsfir_b(const std::vector<BandSpec>& bands, std::size_t k);

// Least-squares linear-phase (type I) design: builds Q = (Q1 + Q2)/2 from the
// Toeplitz/Hankel structure of q, solves Q a = b and assembles a symmetric
// impulse response of odd length p.
//
// Default assembly puts a(0) on the center tap and a(n)/2 at offsets +-n so
// the realized amplitude equals A(w) = sum a(n) cos(n w). paper_literal
// reproduces the doubled-center variant [a_P,...,a_1, 2 a_0, a_1,...,a_P].
FirFilter lsfir_design(const std::vector<BandSpec>& bands, std::size_t p,
                       double fs = 1.0, bool paper_literal = false);

// Bandpass spec in Hz for lsfir_design: stop / transition / pass / transition
// / stop with unit weight in stop+pass bands and zero weight in transitions.
std::vector<BandSpec> bandpass_bands(double f_lo, double f_hi, double fs,
                                     double transition_hz = 1.0);

// Ideal bandpass impulse response truncated with a Hamming window.
FirFilter window_method_bandpass(std::size_t p, double f_lo, double f_hi, double fs);

// Causal convolution with p-1 left zeros; output length = input length.
TimeSeries fir_apply(const FirFilter& filter, const TimeSeries& ts);

struct FirResponse {
    std::vector<double> freqs;      // Hz, uniform on [0, fs/2]
    std::vector<double> magnitude;
    std::vector<double> phase_rad;  // unwrapped
};

FirResponse fir_response(const FirFilter& filter, std::size_t n_freqs);

// CSV exchange: sidecar header "# fs=<Hz> p=<taps>", then "index,tap" rows.
void write_fir_csv(const std::string& path, const FirFilter& filter);
FirFilter read_fir_csv(const std::string& path);
void write_response_csv(const std::string& path, const FirResponse& resp);

}  // namespace ccfir
