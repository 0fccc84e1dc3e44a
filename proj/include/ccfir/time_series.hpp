#pragma once

#include <complex>
#include <string>
#include <vector>

namespace ccfir {

// Uniformly sampled real signal.
struct TimeSeries {
    std::vector<double> samples;
    double fs = 1.0;  // Hz, > 0

    std::size_t size() const { return samples.size(); }
    double duration() const { return samples.empty() ? 0.0 : static_cast<double>(samples.size()) / fs; }
};

enum class SpectrumUnit { Magnitude, PowerDensity, Decibel };

struct Spectrum {
    std::vector<double> freqs;   // Hz, strictly increasing, within [0, fs/2]
    std::vector<double> values;
    SpectrumUnit unit = SpectrumUnit::PowerDensity;
};

struct ComplexSpectrum {
    std::vector<double> freqs;  // Hz, strictly increasing
    std::vector<std::complex<double>> values;
};

// Multichannel record: channels[c] share one sampling rate.
struct MultiChannel {
    std::vector<std::vector<double>> channels;
    double fs = 1.0;
};

TimeSeries white_noise(std::size_t n, std::uint64_t seed);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);

// CSV: header "t,ch0[,ch1,...]", fs inferred from the t column
// (must be uniform to 1e-9 relative).
MultiChannel read_multichannel_csv(const std::string& path);
void write_multichannel_csv(const std::string& path, const MultiChannel& mc);

}  // namespace ccfir
