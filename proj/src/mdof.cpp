#include "ccfir/mdof.hpp"

#include <cmath>
#include <stdexcept>

namespace ccfir {

std::vector<double> default_stiffness_2dof() { return {500.0, 3000.0}; }

// Geometric spacing calibrated so the 9 modes span ~3.3 to ~44.5 Hz.
std::vector<double> default_stiffness_9dof() {
    return {13600.0, 14552.0, 15571.0, 16661.0, 17827.0,
            19075.0, 20410.0, 21839.0, 23367.0};
}

MdofSystem build_chain(const std::vector<double>& stiffnesses, double damping_ratio) {
    const std::size_t n = stiffnesses.size();
    if (n == 0) throw std::invalid_argument("build_chain: need at least one spring");
    for (double k : stiffnesses)
        if (k <= 0.0) throw std::invalid_argument("build_chain: stiffnesses must be > 0");
    if (!(damping_ratio >= 0.0 && damping_ratio < 1.0))
        throw std::invalid_argument("build_chain: damping ratio must be in [0, 1)");

    MdofSystem sys;
    sys.dof = n;
    sys.mass = Eigen::MatrixXd::Identity(n, n);
    sys.stiffness = Eigen::MatrixXd::Zero(n, n);
    // spring i couples mass i-1 and i; spring 0 is grounded
    sys.stiffness(0, 0) += stiffnesses[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double k = stiffnesses[i];
        sys.stiffness(i, i) += k;
        sys.stiffness(i - 1, i - 1) += k;
        sys.stiffness(i, i - 1) -= k;
        sys.stiffness(i - 1, i) -= k;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.stiffness);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("build_chain: eigen decomposition failed");
    sys.natural_freqs_hz.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = eig.eigenvalues()(static_cast<Eigen::Index>(i));
        if (lambda <= 0.0) throw std::runtime_error("build_chain: stiffness matrix not PD");
        sys.natural_freqs_hz[i] = std::sqrt(lambda) / (2.0 * M_PI);
    }

    if (n >= 2) {
        // zeta = (a0/w + a1*w)/2 at the first two modal frequencies
        const double w1 = 2.0 * M_PI * sys.natural_freqs_hz[0];
        const double w2 = 2.0 * M_PI * sys.natural_freqs_hz[1];
        sys.a0 = damping_ratio * 2.0 * w1 * w2 / (w1 + w2);
        sys.a1 = damping_ratio * 2.0 / (w1 + w2);
    } else {
        sys.a1 = 2.0 * damping_ratio / (2.0 * M_PI * sys.natural_freqs_hz[0]);
        sys.stiffness_proportional_fallback = true;
    }
    sys.damping = sys.a0 * sys.mass + sys.a1 * sys.stiffness;
    return sys;
}

SimRecord simulate_rk4(const MdofSystem& system, const TimeSeries& forcing,
                       const Eigen::VectorXd& x0, const Eigen::VectorXd& v0) {
    const std::size_t n = system.dof;
    const std::size_t steps = forcing.size();
    const double dt = 1.0 / forcing.fs;
    const double f_max = system.natural_freqs_hz.back();
    // require at least ~5 samples per period of the highest mode
    if (dt > 0.2 / f_max)
        throw std::invalid_argument("simulate_rk4: dt too large for the highest mode");

    SimRecord rec;
    rec.dt = dt;
    rec.forcing = forcing.samples;
    rec.accelerations.assign(n, std::vector<double>(steps, 0.0));
    rec.displacements.assign(n, std::vector<double>(steps, 0.0));
    rec.velocities.assign(n, std::vector<double>(steps, 0.0));

    Eigen::VectorXd x = x0.size() ? x0 : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v = v0.size() ? v0 : Eigen::VectorXd::Zero(n);
    if (x.size() != static_cast<Eigen::Index>(n) || v.size() != static_cast<Eigen::Index>(n))
        throw std::invalid_argument("simulate_rk4: initial state dimension mismatch");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    auto accel = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& vv, double f) {
        // unit masses: a = F - C v - K x
        return Eigen::VectorXd(f * ones - system.damping * vv - system.stiffness * xx);
    };

    for (std::size_t i = 0; i < steps; ++i) {
        const double f0 = forcing.samples[i];
        const double f1 = (i + 1 < steps) ? forcing.samples[i + 1] : f0;
        const double fh = 0.5 * (f0 + f1);

        const Eigen::VectorXd a = accel(x, v, f0);
        for (std::size_t d = 0; d < n; ++d) {
            const auto di = static_cast<Eigen::Index>(d);
            rec.accelerations[d][i] = a(di);
            rec.displacements[d][i] = x(di);
            rec.velocities[d][i] = v(di);
        }
        if (i + 1 == steps) break;

        const Eigen::VectorXd k1x = v;
        const Eigen::VectorXd k1v = a;
        const Eigen::VectorXd k2x = v + 0.5 * dt * k1v;
        const Eigen::VectorXd k2v = accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, fh);
        const Eigen::VectorXd k3x = v + 0.5 * dt * k2v;
        const Eigen::VectorXd k3v = accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, fh);
        const Eigen::VectorXd k4x = v + dt * k3v;
        const Eigen::VectorXd k4v = accel(x + dt * k3x, v + dt * k3v, f1);

        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return rec;
}

std::vector<std::vector<std::vector<double>>> segment(const SimRecord& record,
                                                      double sample_len_s) {
    const std::size_t steps_per = static_cast<std::size_t>(std::lround(sample_len_s / record.dt));
    const std::size_t total = record.accelerations.empty() ? 0 : record.accelerations[0].size();
    if (steps_per == 0 || steps_per > total)
        throw std::invalid_argument("segment: sample length must fit the record");

    const std::size_t n_samples = total / steps_per;
    std::vector<std::vector<std::vector<double>>> out(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        out[s].resize(record.accelerations.size());
        for (std::size_t d = 0; d < record.accelerations.size(); ++d) {
            const auto begin = record.accelerations[d].begin() +
                               static_cast<std::ptrdiff_t>(s * steps_per);
            out[s][d].assign(begin, begin + static_cast<std::ptrdiff_t>(steps_per));
        }
    }
    return out;
}

}  // namespace ccfir
