#include "ccfir/fir.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ccfir {

double lsfir_q(const std::vector<BandSpec>& bands, std::size_t n) {
    double acc = 0.0;
    for (const auto& band : bands) {
        if (n == 0) {
            acc += band.weight * (band.f_b - band.f_a);
        } else {
            const double npi = static_cast<double>(n) * M_PI;
            acc += band.weight * (std::sin(npi * band.f_b) - std::sin(npi * band.f_a)) / npi;
        }
    }
    return acc;
}

double lsfir_b(const std::vector<BandSpec>& bands, std::size_t k) {
    double acc = 0.0;
    for (const auto& band : bands) {
        const double m = band.d_slope;
        const double c = band.d_intercept;
        if (k == 0) {
            auto anti = [&](double f) { return m * f * f / 2.0 + c * f; };
            acc += band.weight * (anti(band.f_b) - anti(band.f_a));
        } else {
            const double kpi = static_cast<double>(k) * M_PI;
            auto anti = [&](double f) {
                return (m * f + c) * std::sin(kpi * f) / kpi +
                       m * std::cos(kpi * f) / (kpi * kpi);
            };
            acc += band.weight * (anti(band.f_b) - anti(band.f_a));
        }
    }
    return acc;
}

FirFilter lsfir_design(const std::vector<BandSpec>& bands, std::size_t p,
                       double fs, bool paper_literal) {
    if (p % 2 == 0 || p == 0)
        throw std::invalid_argument("lsfir_design: p must be odd (type-I linear phase)");
    bool any_weight = false;
    for (const auto& b : bands) {
        if (!(b.f_a >= 0.0 && b.f_a < b.f_b && b.f_b <= 1.0))
            throw std::invalid_argument("lsfir_design: band edges must satisfy 0 <= f_a < f_b <= 1");
        if (b.weight < 0.0) throw std::invalid_argument("lsfir_design: negative band weight");
        if (b.weight > 0.0) any_weight = true;
    }
    if (!any_weight) throw std::invalid_argument("lsfir_design: need at least one band with weight > 0");

    const std::size_t half = (p - 1) / 2;
    std::vector<double> q(2 * half + 1);
    for (std::size_t n = 0; n <= 2 * half; ++n) q[n] = lsfir_q(bands, n);

    Eigen::MatrixXd qm(half + 1, half + 1);
    for (std::size_t k = 0; k <= half; ++k)
        for (std::size_t n = 0; n <= half; ++n)
            qm(k, n) = 0.5 * (q[k > n ? k - n : n - k] + q[k + n]);

    Eigen::VectorXd rhs(half + 1);
    for (std::size_t k = 0; k <= half; ++k) rhs(k) = lsfir_b(bands, k);

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(qm);
    if (!lu.isInvertible())
        throw std::runtime_error("lsfir_design: singular normal matrix (degenerate band spec)");
    const Eigen::VectorXd a = lu.solve(rhs);

    FirFilter filter;
    filter.fs = fs;
    filter.taps.assign(p, 0.0);
    const double center_scale = paper_literal ? 2.0 : 1.0;
    const double side_scale = paper_literal ? 1.0 : 0.5;
    filter.taps[half] = center_scale * a(0);
    for (std::size_t n = 1; n <= half; ++n) {
        filter.taps[half + n] = side_scale * a(n);
        filter.taps[half - n] = filter.taps[half + n];
    }
    return filter;
}

std::vector<BandSpec> bandpass_bands(double f_lo, double f_hi, double fs,
                                     double transition_hz) {
    if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0))
        throw std::invalid_argument("bandpass_bands: need 0 < f_lo < f_hi < fs/2");
    const double nyq = fs / 2.0;
    const double stop_hi = std::max(0.0, f_lo - transition_hz) / nyq;
    const double stop_lo = std::min(nyq, f_hi + transition_hz) / nyq;
    std::vector<BandSpec> bands;
    if (stop_hi > 0.0) bands.push_back({0.0, stop_hi, 1.0, 0.0, 0.0});
    bands.push_back({f_lo / nyq, f_hi / nyq, 1.0, 0.0, 1.0});
    if (stop_lo < 1.0) bands.push_back({stop_lo, 1.0, 1.0, 0.0, 0.0});
    return bands;
}

FirFilter window_method_bandpass(std::size_t p, double f_lo, double f_hi, double fs) {
    if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0))
        throw std::invalid_argument("window_method_bandpass: need 0 < f_lo < f_hi < fs/2");
    if (p == 0) throw std::invalid_argument("window_method_bandpass: p must be >= 1");

    const double w1 = 2.0 * M_PI * f_lo / fs;
    const double w2 = 2.0 * M_PI * f_hi / fs;
    const double center = static_cast<double>(p - 1) / 2.0;

    FirFilter filter;
    filter.fs = fs;
    filter.taps.resize(p);
    for (std::size_t n = 0; n < p; ++n) {
        const double t = static_cast<double>(n) - center;
        filter.taps[n] = (t == 0.0) ? (w2 - w1) / M_PI
                                    : (std::sin(w2 * t) - std::sin(w1 * t)) / (M_PI * t);
    }
    // Hamming taper
    if (p > 1) {
        for (std::size_t n = 0; n < p; ++n) {
            const double w = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(n) /
                                                    static_cast<double>(p - 1));
            filter.taps[n] *= w;
        }
    }
    // exact symmetry
    for (std::size_t n = 0; n < p / 2; ++n) filter.taps[p - 1 - n] = filter.taps[n];
    return filter;
}

TimeSeries fir_apply(const FirFilter& filter, const TimeSeries& ts) {
    if (filter.fs != ts.fs) throw std::invalid_argument("fir_apply: sampling rate mismatch");
    const std::size_t n = ts.size();
    const std::size_t p = filter.taps.size();
    TimeSeries out;
    out.fs = ts.fs;
    out.samples.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const std::size_t k_max = std::min(p - 1, i);
        for (std::size_t k = 0; k <= k_max; ++k) acc += filter.taps[k] * ts.samples[i - k];
        out.samples[i] = acc;
    }
    return out;
}

FirResponse fir_response(const FirFilter& filter, std::size_t n_freqs) {
    if (n_freqs < 2) throw std::invalid_argument("fir_response: need at least 2 frequencies");
    FirResponse resp;
    resp.freqs.resize(n_freqs);
    resp.magnitude.resize(n_freqs);
    resp.phase_rad.resize(n_freqs);
    double prev_raw = 0.0, offset = 0.0;
    for (std::size_t i = 0; i < n_freqs; ++i) {
        const double f = static_cast<double>(i) * (filter.fs / 2.0) /
                         static_cast<double>(n_freqs - 1);
        const double w = 2.0 * M_PI * f / filter.fs;
        std::complex<double> h(0.0, 0.0);
        for (std::size_t k = 0; k < filter.taps.size(); ++k)
            h += filter.taps[k] * std::polar(1.0, -w * static_cast<double>(k));
        resp.freqs[i] = f;
        resp.magnitude[i] = std::abs(h);
        const double raw = std::arg(h);
        if (i > 0) {
            double d = raw - prev_raw;
            while (d > M_PI) {
                d -= 2.0 * M_PI;
                offset -= 2.0 * M_PI;
            }
            while (d < -M_PI) {
                d += 2.0 * M_PI;
                offset += 2.0 * M_PI;
            }
        }
        prev_raw = raw;
        resp.phase_rad[i] = raw + offset;
    }
    return resp;
}

void write_fir_csv(const std::string& path, const FirFilter& filter) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# fs=" << std::setprecision(17) << filter.fs << " p=" << filter.taps.size() << "\n";
    out << "index,tap\n";
    for (std::size_t i = 0; i < filter.taps.size(); ++i)
        out << i << "," << std::setprecision(17) << filter.taps[i] << "\n";
}

FirFilter read_fir_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# fs=", 0) != 0)
        throw std::runtime_error("missing '# fs=' sidecar header: " + path);
    FirFilter filter;
    std::size_t p = 0;
    {
        std::istringstream hdr(line.substr(2));
        std::string tok;
        while (hdr >> tok) {
            if (tok.rfind("fs=", 0) == 0) filter.fs = std::stod(tok.substr(3));
            if (tok.rfind("p=", 0) == 0) p = std::stoul(tok.substr(2));
        }
    }
    if (!std::getline(in, line) || line != "index,tap")
        throw std::runtime_error("missing 'index,tap' header: " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("bad tap row: " + path);
        filter.taps.push_back(std::stod(line.substr(comma + 1)));
    }
    if (p != filter.taps.size())
        throw std::runtime_error("tap count does not match header: " + path);
    return filter;
}

void write_response_csv(const std::string& path, const FirResponse& resp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "freq_hz,magnitude,phase_rad\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < resp.freqs.size(); ++i)
        out << resp.freqs[i] << "," << resp.magnitude[i] << "," << resp.phase_rad[i] << "\n";
}

}  // namespace ccfir
