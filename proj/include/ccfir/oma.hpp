#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "ccfir/time_series.hpp"

namespace ccfir {

// Per-bin Hermitian cross-power-spectral-density matrices.
struct CpsdMatrix {
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> matrices;
};

struct SingularSpectra {
    std::vector<double> freqs;
    std::vector<std::vector<double>> values;  // per bin, descending
};

// Entry (i, j) = welch_cpsd(ch_i, ch_j); upper triangle computed, lower
// mirrored conjugate so Hermitian symmetry holds exactly.
CpsdMatrix cpsd_matrix(const MultiChannel& record, std::size_t window_len, double overlap);

// Per-bin SVD of the Hermitian matrix via symmetric eigen decomposition.
SingularSpectra fdd_singular_values(const CpsdMatrix& cpsd, std::size_t k);

// Local maxima whose prominence ratio over the local baseline exceeds
// min_prominence_ratio; peaks closer than min_separation_hz are merged
// (strongest wins).
std::vector<double> peak_pick(const Spectrum& spectrum, double min_prominence_ratio,
                              double min_separation_hz);

void write_singular_csv(const std::string& path, const SingularSpectra& spectra);

}  // namespace ccfir
