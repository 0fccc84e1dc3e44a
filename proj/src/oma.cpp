#include "ccfir/oma.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "ccfir/signal.hpp"

namespace ccfir {

CpsdMatrix cpsd_matrix(const MultiChannel& record, std::size_t window_len, double overlap) {
    const std::size_t n_ch = record.channels.size();
    if (n_ch == 0) throw std::invalid_argument("cpsd_matrix: need at least one channel");

    CpsdMatrix out;
    for (std::size_t i = 0; i < n_ch; ++i) {
        TimeSeries x{record.channels[i], record.fs};
        for (std::size_t j = i; j < n_ch; ++j) {
            TimeSeries y{record.channels[j], record.fs};
            const auto s = welch_cpsd(x, y, window_len, overlap);
            if (out.matrices.empty()) {
                out.freqs = s.freqs;
                out.matrices.assign(s.freqs.size(), Eigen::MatrixXcd::Zero(n_ch, n_ch));
            }
            for (std::size_t b = 0; b < s.values.size(); ++b) {
                auto& m = out.matrices[b];
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.values[b];
                if (i != j)
                    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                        std::conj(s.values[b]);
                else
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
                        s.values[b].real();  // diagonal exactly real
            }
        }
    }
    return out;
}

SingularSpectra fdd_singular_values(const CpsdMatrix& cpsd, std::size_t k) {
    if (cpsd.matrices.empty()) throw std::invalid_argument("fdd_singular_values: empty CPSD");
    const std::size_t n = static_cast<std::size_t>(cpsd.matrices[0].rows());
    if (k > n) throw std::invalid_argument("fdd_singular_values: k exceeds channel count");

    SingularSpectra out;
    out.freqs = cpsd.freqs;
    out.values.resize(cpsd.matrices.size());
    for (std::size_t b = 0; b < cpsd.matrices.size(); ++b) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cpsd.matrices[b]);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("fdd_singular_values: eigen decomposition failed");
        std::vector<double> sv(n);
        for (std::size_t i = 0; i < n; ++i)
            sv[i] = std::abs(eig.eigenvalues()(static_cast<Eigen::Index>(i)));
        std::sort(sv.begin(), sv.end(), std::greater<double>());
        sv.resize(k);
        out.values[b] = std::move(sv);
    }
    return out;
}

std::vector<double> peak_pick(const Spectrum& spectrum, double min_prominence_ratio,
                              double min_separation_hz) {
    const auto& v = spectrum.values;
    const std::size_t n = v.size();
    struct Peak {
        double freq;
        double height;
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
        // walk out to the key cols on both sides
        double left_min = v[i];
        for (std::size_t j = i; j-- > 0;) {
            if (v[j] > v[i]) break;
            left_min = std::min(left_min, v[j]);
        }
        double right_min = v[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            if (v[j] > v[i]) break;
            right_min = std::min(right_min, v[j]);
        }
        const double baseline = std::max(left_min, right_min);
        const bool prominent =
            baseline <= 0.0 ? v[i] > 0.0 : (v[i] / baseline) >= min_prominence_ratio;
        if (prominent) peaks.push_back({spectrum.freqs[i], v[i]});
    }

    // merge close peaks, strongest wins
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.height > b.height; });
    std::vector<Peak> kept;
    for (const auto& p : peaks) {
        const bool close = std::any_of(kept.begin(), kept.end(), [&](const Peak& q) {
            return std::abs(q.freq - p.freq) < min_separation_hz;
        });
        if (!close) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(),
              [](const Peak& a, const Peak& b) { return a.freq < b.freq; });
    std::vector<double> freqs;
    for (const auto& p : kept) freqs.push_back(p.freq);
    return freqs;
}

void write_singular_csv(const std::string& path, const SingularSpectra& spectra) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::size_t k = spectra.values.empty() ? 0 : spectra.values[0].size();
    out << "freq_hz";
    for (std::size_t i = 1; i <= k; ++i) out << ",sv" << i;
    out << "\n" << std::setprecision(17);
    for (std::size_t b = 0; b < spectra.freqs.size(); ++b) {
        out << spectra.freqs[b];
        for (double s : spectra.values[b]) out << "," << s;
        out << "\n";
    }
}

}  // namespace ccfir
