#include "ccfir/time_series.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "ccfir/rng.hpp"

namespace ccfir {

TimeSeries white_noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    TimeSeries ts;
    ts.fs = 1.0;
    ts.samples.resize(n);
    for (auto& s : ts.samples) s = rng.normal();
    return ts;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

MultiChannel read_multichannel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
    if (line.rfind("t,", 0) != 0 && line != "t")
        throw std::runtime_error("CSV header must start with 't,': " + path);

    std::size_t n_channels = 0;
    for (char c : line)
        if (c == ',') ++n_channels;

    MultiChannel mc;
    mc.channels.resize(n_channels);
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) break;
        times.push_back(std::stod(cell));
        for (std::size_t c = 0; c < n_channels; ++c) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error("short CSV row in " + path);
            mc.channels[c].push_back(std::stod(cell));
        }
    }
    if (times.size() < 2) throw std::runtime_error("need at least 2 samples: " + path);

    const double dt = times[1] - times[0];
    if (dt <= 0.0) throw std::runtime_error("non-increasing time column: " + path);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (std::abs(step - dt) > 1e-9 * std::abs(dt))
            throw std::runtime_error("non-uniform time column: " + path);
    }
    mc.fs = 1.0 / dt;
    return mc;
}

void write_multichannel_csv(const std::string& path, const MultiChannel& mc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t";
    for (std::size_t c = 0; c < mc.channels.size(); ++c) out << ",ch" << c;
    out << "\n";
    const std::size_t n = mc.channels.empty() ? 0 : mc.channels[0].size();
    out << std::setprecision(17);
    for (std::size_t i = 0; i < n; ++i) {
        out << static_cast<double>(i) / mc.fs;
        for (const auto& ch : mc.channels) out << "," << ch[i];
        out << "\n";
    }
}

}  // namespace ccfir
