#include "ccfir/signal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "fft.hpp"

namespace ccfir {

std::vector<double> hamming_window(std::size_t n) {
    if (n == 0) throw std::invalid_argument("hamming_window: n must be >= 1");
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t k = 0; k < n; ++k) {
        w[k] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(k) /
                                      static_cast<double>(n - 1));
    }
    // enforce exact symmetry against rounding differences in cos
    for (std::size_t k = 0; k < n / 2; ++k) w[n - 1 - k] = w[k];
    return w;
}

namespace {

// Averaged modified periodogram with an arbitrary window, density scaling.
Spectrum windowed_average_psd(const std::vector<double>& x, double fs,
                              const std::vector<double>& window, double overlap) {
    const std::size_t wlen = window.size();
    const std::size_t n = x.size();
    if (wlen > n) throw std::invalid_argument("welch: window longer than signal");
    if (overlap < 0.0 || overlap >= 1.0) throw std::invalid_argument("welch: overlap must be in [0,1)");

    const std::size_t step = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(static_cast<double>(wlen) * (1.0 - overlap))));
    const std::size_t n_segments = (n - wlen) / step + 1;

    double u = 0.0;
    for (double w : window) u += w * w;

    const std::size_t n_bins = wlen / 2 + 1;
    Spectrum s;
    s.unit = SpectrumUnit::PowerDensity;
    s.freqs.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
        s.freqs[k] = static_cast<double>(k) * fs / static_cast<double>(wlen);
    s.values.assign(n_bins, 0.0);

    std::vector<double> seg(wlen);
    for (std::size_t i = 0; i < n_segments; ++i) {
        for (std::size_t k = 0; k < wlen; ++k) seg[k] = x[i * step + k] * window[k];
        const auto spec = detail::rfft(seg);
        for (std::size_t k = 0; k < n_bins; ++k) {
            double p = std::norm(spec[k]) / (fs * u);
            if (k != 0 && !(wlen % 2 == 0 && k == n_bins - 1)) p *= 2.0;  // one-sided
            s.values[k] += p;
        }
    }
    for (auto& v : s.values) v /= static_cast<double>(n_segments);
    return s;
}

}  // namespace

Spectrum periodogram_psd(const TimeSeries& ts) {
    if (ts.size() < 2) throw std::invalid_argument("periodogram_psd: need at least 2 samples");
    const std::vector<double> rect(ts.size(), 1.0);
    return windowed_average_psd(ts.samples, ts.fs, rect, 0.0);
}

Spectrum welch_psd(const TimeSeries& ts, std::size_t window_len, double overlap) {
    return windowed_average_psd(ts.samples, ts.fs, hamming_window(window_len), overlap);
}

ComplexSpectrum welch_cpsd(const TimeSeries& x, const TimeSeries& y,
                           std::size_t window_len, double overlap) {
    if (x.size() != y.size()) throw std::invalid_argument("welch_cpsd: length mismatch");
    if (x.fs != y.fs) throw std::invalid_argument("welch_cpsd: sampling rate mismatch");
    const std::size_t n = x.size();
    if (window_len > n) throw std::invalid_argument("welch_cpsd: window longer than signal");
    if (overlap < 0.0 || overlap >= 1.0) throw std::invalid_argument("welch_cpsd: overlap must be in [0,1)");

    const auto window = hamming_window(window_len);
    const std::size_t step = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(static_cast<double>(window_len) * (1.0 - overlap))));
    const std::size_t n_segments = (n - window_len) / step + 1;

    double u = 0.0;
    for (double w : window) u += w * w;

    const std::size_t n_bins = window_len / 2 + 1;
    ComplexSpectrum s;
    s.freqs.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
        s.freqs[k] = static_cast<double>(k) * x.fs / static_cast<double>(window_len);
    s.values.assign(n_bins, {0.0, 0.0});

    std::vector<double> seg_x(window_len), seg_y(window_len);
    for (std::size_t i = 0; i < n_segments; ++i) {
        for (std::size_t k = 0; k < window_len; ++k) {
            seg_x[k] = x.samples[i * step + k] * window[k];
            seg_y[k] = y.samples[i * step + k] * window[k];
        }
        const auto sx = detail::rfft(seg_x);
        const auto sy = detail::rfft(seg_y);
        for (std::size_t k = 0; k < n_bins; ++k) {
            std::complex<double> p = std::conj(sx[k]) * sy[k] / (x.fs * u);
            if (k != 0 && !(window_len % 2 == 0 && k == n_bins - 1)) p *= 2.0;
            s.values[k] += p;
        }
    }
    for (auto& v : s.values) v /= static_cast<double>(n_segments);
    return s;
}

std::vector<double> savgol_smooth(const std::vector<double>& values,
                                  std::size_t window, std::size_t order) {
    if (window % 2 == 0) throw std::invalid_argument("savgol_smooth: window must be odd");
    if (order >= window) throw std::invalid_argument("savgol_smooth: order must be < window");
    if (window > values.size()) throw std::invalid_argument("savgol_smooth: window longer than input");

    const std::size_t n = values.size();
    const std::size_t half = window / 2;

    // Fit a polynomial of the given order on [lo, hi] and evaluate at `at`.
    auto fit_eval = [&](std::size_t lo, std::size_t hi, std::size_t at) {
        const std::size_t m = hi - lo + 1;
        Eigen::MatrixXd a(m, order + 1);
        Eigen::VectorXd y(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double t = static_cast<double>(lo + i) - static_cast<double>(at);
            double pw = 1.0;
            for (std::size_t j = 0; j <= order; ++j) {
                a(i, j) = pw;
                pw *= t;
            }
            y(i) = values[lo + i];
        }
        const Eigen::VectorXd c = (a.transpose() * a).ldlt().solve(a.transpose() * y);
        return c(0);  // value at t = 0
    };

    std::vector<double> out(n);

    // interior: one set of convolution coefficients, reused
    if (n >= window) {
        Eigen::MatrixXd a(window, order + 1);
        for (std::size_t i = 0; i < window; ++i) {
            const double t = static_cast<double>(i) - static_cast<double>(half);
            double pw = 1.0;
            for (std::size_t j = 0; j <= order; ++j) {
                a(i, j) = pw;
                pw *= t;
            }
        }
        // row of the LS projection that lands on the window center
        const Eigen::MatrixXd pinv = (a.transpose() * a).ldlt().solve(a.transpose());
        const Eigen::VectorXd coeffs = pinv.row(0);
        for (std::size_t i = half; i + half < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < window; ++k) acc += coeffs(k) * values[i - half + k];
            out[i] = acc;
        }
    }
    for (std::size_t i = 0; i < std::min(half, n); ++i)
        out[i] = fit_eval(0, std::min(n - 1, i + half), i);
    for (std::size_t i = (n > half ? n - half : 0); i < n; ++i)
        out[i] = fit_eval(i >= half ? i - half : 0, n - 1, i);
    return out;
}

double ar_spectral_density(const std::vector<double>& weights, double sigma2, double f) {
    if (f < 0.0 || f > 0.5) throw std::invalid_argument("ar_spectral_density: f must be in [0, 0.5]");
    std::complex<double> den(1.0, 0.0);
    for (std::size_t k = 1; k <= weights.size(); ++k) {
        const double phase = -2.0 * M_PI * f * static_cast<double>(k);
        den -= weights[k - 1] * std::polar(1.0, phase);
    }
    const double mag2 = std::norm(den);
    if (mag2 < 1e-300) throw std::runtime_error("ar_spectral_density: pole on the unit circle");
    return sigma2 / mag2;
}

namespace {

double bessel_i0(double x) {
    // power series, converges quickly for the beta values used here
    double sum = 1.0, term = 1.0;
    const double x2 = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= x2 / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

std::vector<double> kaiser_sinc_lowpass(std::size_t n_taps, double cutoff, double beta) {
    // cutoff in cycles/sample; odd n_taps, linear phase
    std::vector<double> h(n_taps);
    const double center = static_cast<double>(n_taps - 1) / 2.0;
    const double i0b = bessel_i0(beta);
    for (std::size_t i = 0; i < n_taps; ++i) {
        const double t = static_cast<double>(i) - center;
        const double sinc = (t == 0.0) ? 2.0 * cutoff
                                       : std::sin(2.0 * M_PI * cutoff * t) / (M_PI * t);
        const double r = 2.0 * t / static_cast<double>(n_taps - 1);
        const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[i] = sinc * w;
    }
    return h;
}

}  // namespace

TimeSeries resample(const TimeSeries& ts, std::size_t up, std::size_t down) {
    if (up < 1 || down < 1) throw std::invalid_argument("resample: factors must be >= 1");
    const std::size_t g = std::gcd(up, down);
    up /= g;
    down /= g;
    if (up == 1 && down == 1) return ts;

    const std::size_t n = ts.size();
    TimeSeries out;
    out.fs = ts.fs * static_cast<double>(up) / static_cast<double>(down);
    if (n == 0) return out;

    // 80 dB Kaiser anti-aliasing lowpass at the tighter of the two Nyquists
    const std::size_t ratio = std::max(up, down);
    const double cutoff = 0.5 / static_cast<double>(ratio);
    const double beta = 0.1102 * (80.0 - 8.7);
    std::size_t n_taps = 32 * ratio + 1;
    if (n_taps % 2 == 0) ++n_taps;
    auto h = kaiser_sinc_lowpass(n_taps, cutoff, beta);
    for (auto& v : h) v *= static_cast<double>(up);  // gain lost to zero-stuffing

    const std::size_t delay = (n_taps - 1) / 2;
    const std::size_t n_up = n * up;
    const std::size_t n_out = (n_up + down - 1) / down;
    out.samples.assign(n_out, 0.0);

    // polyphase evaluation of filter(zero_stuffed)[j*down + delay]
    for (std::size_t j = 0; j < n_out; ++j) {
        const std::size_t pos = j * down + delay;
        double acc = 0.0;
        // contributing input samples: pos - k = i*up
        const std::size_t i_max = std::min<std::size_t>(n - 1, pos / up);
        for (std::size_t i = (pos >= n_taps - 1) ? (pos - (n_taps - 1) + up - 1) / up : 0;
             i <= i_max; ++i) {
            acc += ts.samples[i] * h[pos - i * up];
        }
        out.samples[j] = acc;
    }
    return out;
}

}  // namespace ccfir
