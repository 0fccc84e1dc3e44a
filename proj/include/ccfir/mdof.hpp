#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ccfir/time_series.hpp"

namespace ccfir {

// Lumped-mass chain: unit masses, grounded first spring, Rayleigh damping
// C = a0 M + a1 K fit so the first two modes share the target damping ratio.
struct MdofSystem {
    std::size_t dof = 0;
    Eigen::MatrixXd mass;       // identity (unit masses)
    Eigen::MatrixXd stiffness;  // tridiagonal chain
    Eigen::MatrixXd damping;
    std::vector<double> natural_freqs_hz;  // ascending
    double a0 = 0.0, a1 = 0.0;
    bool stiffness_proportional_fallback = false;  // N == 1
};

struct SimRecord {
    std::vector<std::vector<double>> accelerations;  // dof x steps
    std::vector<std::vector<double>> displacements;  // dof x steps
    std::vector<std::vector<double>> velocities;     // dof x steps
    std::vector<double> forcing;
    double dt = 0.01;
};

MdofSystem build_chain(const std::vector<double>& stiffnesses, double damping_ratio);

// Classical RK4 on the first-order state form; the same scalar forcing drives
// every DOF. Forcing between samples is linearly interpolated. Initial
// displacement/velocity default to zero (free-decay runs pass them in).
SimRecord simulate_rk4(const MdofSystem& system, const TimeSeries& forcing,
                       const Eigen::VectorXd& x0 = Eigen::VectorXd(),
                       const Eigen::VectorXd& v0 = Eigen::VectorXd());

// Non-overlapping contiguous segments; the remainder is dropped.
std::vector<std::vector<std::vector<double>>> segment(const SimRecord& record,
                                                      double sample_len_s);

// Default calibrated configurations (paper-style 2- and 9-DOF chains).
std::vector<double> default_stiffness_2dof();
std::vector<double> default_stiffness_9dof();

}  // namespace ccfir
