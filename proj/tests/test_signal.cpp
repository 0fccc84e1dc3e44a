#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ccfir/iir.hpp"
#include "ccfir/rng.hpp"
#include "ccfir/signal.hpp"
#include "ccfir/time_series.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <vector>

using namespace ccfir;

namespace {

TimeSeries tone(double freq, double fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
    TimeSeries ts;
    ts.fs = fs;
    ts.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        ts.samples[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / fs + phase);
    return ts;
}

double mean_square(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(v.size());
}

double spectrum_integral(const Spectrum& s) {
    const double df = s.freqs[1] - s.freqs[0];
    return std::accumulate(s.values.begin(), s.values.end(), 0.0) * df;
}

}  // namespace

TEST_CASE("rng golden values are frozen") {
    auto ts = white_noise(4, 42);
    REQUIRE(ts.samples.size() == 4);
    CHECK(ts.samples[0] == doctest::Approx(-0.26860736946209507).epsilon(1e-15));
    CHECK(ts.samples[1] == doctest::Approx(0.581971051862883).epsilon(1e-15));
    CHECK(ts.samples[2] == doctest::Approx(-0.054462170108151145).epsilon(1e-15));
    CHECK(ts.samples[3] == doctest::Approx(-0.17177820812195804).epsilon(1e-15));
}

TEST_CASE("rng moments and stream independence") {
    auto ts = white_noise(200000, 1);
    CHECK(std::abs(mean(ts.samples)) < 0.01);
    CHECK(variance(ts.samples) == doctest::Approx(1.0).epsilon(0.02));

    CHECK(Rng::derive_seed(7, 0) != Rng::derive_seed(7, 1));
    CHECK(Rng::derive_seed(7, 0) != Rng::derive_seed(8, 0));
    auto a = white_noise(100, Rng::derive_seed(7, 0));
    auto b = white_noise(100, Rng::derive_seed(7, 1));
    double corr = 0.0;
    for (std::size_t i = 0; i < 100; ++i) corr += a.samples[i] * b.samples[i];
    CHECK(std::abs(corr / 100.0) < 0.2);
}

TEST_CASE("hamming window endpoints and symmetry") {
    auto w1 = hamming_window(1);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0] == doctest::Approx(1.0));

    auto w = hamming_window(51);
    CHECK(w[0] == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(w[50] == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(w[25] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 51; ++i) CHECK(w[i] == w[50 - i]);

    auto w3 = hamming_window(3);
    CHECK(w3[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("periodogram satisfies Parseval") {
    auto ts = white_noise(4096, 11);
    ts.fs = 50.0;
    auto psd = periodogram_psd(ts);
    REQUIRE(psd.freqs.size() == 2049);
    CHECK(psd.freqs.front() == doctest::Approx(0.0));
    CHECK(psd.freqs.back() == doctest::Approx(25.0));
    CHECK(spectrum_integral(psd) == doctest::Approx(mean_square(ts.samples)).epsilon(1e-9));
}

TEST_CASE("periodogram concentrates a bin-aligned tone") {
    const double fs = 100.0;
    const std::size_t n = 1000;
    auto ts = tone(10.0, fs, n);  // exactly bin 100
    auto psd = periodogram_psd(ts);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < psd.values.size(); ++i)
        if (psd.values[i] > psd.values[peak]) peak = i;
    CHECK(psd.freqs[peak] == doctest::Approx(10.0).epsilon(1e-12));
    const double df = psd.freqs[1] - psd.freqs[0];
    CHECK(psd.values[peak] * df == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("welch bin layout matches window length") {
    auto ts = white_noise(16384, 3);
    ts.fs = 60.0;
    auto psd = welch_psd(ts, 2048, 0.5);
    REQUIRE(psd.freqs.size() == 1025);
    CHECK(psd.freqs[1] - psd.freqs[0] == doctest::Approx(60.0 / 2048.0).epsilon(1e-12));
    CHECK(psd.freqs[1] - psd.freqs[0] == doctest::Approx(0.029296875).epsilon(1e-9));
    CHECK(psd.freqs.back() == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("welch of white noise is flat at the noise density") {
    auto ts = white_noise(200000, 17);
    ts.fs = 40.0;  // one-sided density = 2 * variance / fs
    auto psd = welch_psd(ts, 512, 0.5);
    const double expect = 2.0 / 40.0;
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 5; i + 5 < psd.values.size(); ++i) {
        lo = std::min(lo, psd.values[i]);
        hi = std::max(hi, psd.values[i]);
    }
    CHECK(lo > 0.8 * expect);
    CHECK(hi < 1.25 * expect);
    CHECK(spectrum_integral(psd) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("welch localizes an off-grid tone to the nearest bin") {
    auto ts = tone(10.3, 100.0, 20000);
    auto psd = welch_psd(ts, 1024, 0.5);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < psd.values.size(); ++i)
        if (psd.values[i] > psd.values[peak]) peak = i;
    CHECK(std::abs(psd.freqs[peak] - 10.3) < 100.0 / 1024.0);
}

TEST_CASE("cpsd reduces to psd on the diagonal") {
    auto ts = white_noise(8192, 5);
    ts.fs = 100.0;
    auto psd = welch_psd(ts, 512, 0.5);
    auto cpsd = welch_cpsd(ts, ts, 512, 0.5);
    REQUIRE(cpsd.values.size() == psd.values.size());
    for (std::size_t i = 0; i < psd.values.size(); ++i) {
        CHECK(cpsd.values[i].real() == doctest::Approx(psd.values[i]).epsilon(1e-10));
        CHECK(std::abs(cpsd.values[i].imag()) < 1e-12 * (1.0 + psd.values[i]));
    }
}

TEST_CASE("cpsd is conjugate symmetric and tracks a pure delay") {
    auto x = white_noise(60000, 9);
    x.fs = 100.0;
    const std::size_t delay = 3;
    TimeSeries y;
    y.fs = x.fs;
    y.samples.assign(x.samples.size(), 0.0);
    for (std::size_t i = delay; i < x.samples.size(); ++i)
        y.samples[i] = x.samples[i - delay];

    auto sxy = welch_cpsd(x, y, 512, 0.5);
    auto syx = welch_cpsd(y, x, 512, 0.5);
    for (std::size_t i = 0; i < sxy.values.size(); ++i)
        CHECK(std::abs(sxy.values[i] - std::conj(syx.values[i])) < 1e-12);

    // phase of S_xy at bin f is -2 pi f delay / fs; check away from dc/nyquist
    for (std::size_t i = 20; i < sxy.values.size() - 20; i += 37) {
        const double expect = -2.0 * M_PI * sxy.freqs[i] * static_cast<double>(delay) / x.fs;
        double got = std::arg(sxy.values[i]);
        double diff = got - expect;
        while (diff > M_PI) diff -= 2.0 * M_PI;
        while (diff < -M_PI) diff += 2.0 * M_PI;
        CHECK(std::abs(diff) < 0.05);
    }
}

TEST_CASE("savgol reproduces a cubic exactly including edges") {
    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i);
        v[i] = 0.3 * t * t * t - 2.0 * t * t + t - 5.0;
    }
    auto out = savgol_smooth(v, 7, 3);
    REQUIRE(out.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(out[i] == doctest::Approx(v[i]).epsilon(1e-9));
}

TEST_CASE("savgol attenuates noise on a smooth trend") {
    Rng rng(21);
    std::vector<double> clean(500), noisy(500);
    for (std::size_t i = 0; i < clean.size(); ++i) {
        clean[i] = std::sin(2.0 * M_PI * static_cast<double>(i) / 250.0);
        noisy[i] = clean[i] + 0.3 * rng.normal();
    }
    auto out = savgol_smooth(noisy, 51, 3);
    double err_in = 0.0, err_out = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        err_in += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
        err_out += (out[i] - clean[i]) * (out[i] - clean[i]);
    }
    CHECK(err_out < 0.25 * err_in);
}

TEST_CASE("ar spectral density matches closed forms") {
    CHECK(ar_spectral_density({}, 2.5, 0.2) == doctest::Approx(2.5).epsilon(1e-12));
    // AR(1), w = 0.9: S(0) = s2/(1-0.9)^2, S(0.5) = s2/(1+0.9)^2
    CHECK(ar_spectral_density({0.9}, 1.0, 0.0) == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(ar_spectral_density({0.9}, 1.0, 0.5) ==
          doctest::Approx(1.0 / (1.9 * 1.9)).epsilon(1e-10));
    // f = 0.25: |1 - 0.9 e^{-i pi/2}|^2 = 1 + 0.81
    CHECK(ar_spectral_density({0.9}, 1.0, 0.25) == doctest::Approx(1.0 / 1.81).epsilon(1e-10));
}

TEST_CASE("resample identity and rate bookkeeping") {
    auto ts = white_noise(1000, 2);
    ts.fs = 100.0;
    auto same = resample(ts, 5, 5);
    CHECK(same.fs == doctest::Approx(100.0));
    REQUIRE(same.samples.size() == ts.samples.size());
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        CHECK(same.samples[i] == doctest::Approx(ts.samples[i]).epsilon(1e-12));

    auto up = resample(ts, 3, 2);
    CHECK(up.fs == doctest::Approx(150.0));
    CHECK(std::abs(static_cast<double>(up.samples.size()) - 1500.0) <= 2.0);
}

TEST_CASE("resample preserves an in-band tone") {
    auto ts = tone(5.0, 100.0, 4000);
    auto out = resample(ts, 3, 2);  // 100 -> 150 Hz
    double err = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 200; i + 200 < out.samples.size(); ++i) {
        const double expect = std::sin(2.0 * M_PI * 5.0 * static_cast<double>(i) / 150.0);
        err += (out.samples[i] - expect) * (out.samples[i] - expect);
        ++count;
    }
    CHECK(std::sqrt(err / static_cast<double>(count)) < 1e-3);
}

TEST_CASE("decimation suppresses out-of-band energy") {
    // 35 Hz tone is above the 25 Hz Nyquist of the 50 Hz target rate
    auto hi = tone(35.0, 100.0, 8000);
    auto out = resample(hi, 1, 2);
    double rms = std::sqrt(mean_square(std::vector<double>(
        out.samples.begin() + 100, out.samples.end() - 100)));
    CHECK(rms < 1e-3);  // >= 57 dB down from 0.707
}

TEST_CASE("cheby2 bandpass meets its template") {
    auto cascade = cheby2_bandpass(8, 80.0, 9.5, 10.5, 100.0);
    CHECK(cascade.stable());
    CHECK(cascade.sections.size() == 8);  // order doubles, biquads = order

    double peak = 0.0;
    for (double f = 9.5; f <= 10.5; f += 0.005)
        peak = std::max(peak, std::abs(cascade.response_at(f)));
    CHECK(peak > 0.99);
    CHECK(peak < 1.01);

    const double floor_lin = std::pow(10.0, -80.0 / 20.0);
    for (double f : {1.0, 5.0, 8.0, 9.4, 10.6, 13.0, 20.0, 35.0, 45.0})
        CHECK(std::abs(cascade.response_at(f)) < floor_lin * 1.05);
}

TEST_CASE("iir impulse response transforms to the frequency response") {
    auto cascade = cheby2_bandpass(4, 60.0, 8.0, 12.0, 100.0);
    TimeSeries impulse;
    impulse.fs = 100.0;
    impulse.samples.assign(8192, 0.0);
    impulse.samples[0] = 1.0;
    auto h = iir_filter(cascade, impulse);
    for (double f : {2.0, 9.0, 10.0, 11.0, 30.0}) {
        std::complex<double> dft(0.0, 0.0);
        for (std::size_t n = 0; n < h.samples.size(); ++n)
            dft += h.samples[n] *
                   std::polar(1.0, -2.0 * M_PI * f * static_cast<double>(n) / 100.0);
        const auto expect = cascade.response_at(f);
        CHECK(std::abs(dft - expect) < 1e-6);
    }
}

TEST_CASE("iir filtering a tone applies gain and phase") {
    auto cascade = cheby2_bandpass(4, 60.0, 8.0, 12.0, 100.0);
    auto ts = tone(10.0, 100.0, 6000);
    auto out = iir_filter(cascade, ts);
    const auto h = cascade.response_at(10.0);
    double err = 0.0;
    for (std::size_t i = 2000; i < 6000; ++i) {
        const double expect = std::abs(h) *
            std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / 100.0 + std::arg(h));
        err = std::max(err, std::abs(out.samples[i] - expect));
    }
    CHECK(err < 1e-6);
}

TEST_CASE("multichannel csv roundtrip preserves data and rate") {
    MultiChannel mc;
    mc.fs = 50.0;
    mc.channels = {{1.0, 2.5, -3.0, 0.125}, {0.0, -1.0, 4.0, 2.0}};
    const std::string path = "test_signal_roundtrip.csv";
    write_multichannel_csv(path, mc);
    auto back = read_multichannel_csv(path);
    CHECK(back.fs == doctest::Approx(50.0).epsilon(1e-9));
    REQUIRE(back.channels.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
        REQUIRE(back.channels[c].size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(back.channels[c][i] == doctest::Approx(mc.channels[c][i]).epsilon(1e-12));
    }
    std::remove(path.c_str());
}
