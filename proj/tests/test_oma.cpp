#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ccfir/mdof.hpp"
#include "ccfir/oma.hpp"
#include "ccfir/signal.hpp"
#include "ccfir/time_series.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace ccfir;

TEST_CASE("cpsd matrices are exactly hermitian with psd diagonals") {
    MultiChannel mc;
    mc.fs = 100.0;
    auto a = white_noise(8192, 31);
    auto b = white_noise(8192, 32);
    mc.channels = {a.samples, b.samples};

    auto cpsd = cpsd_matrix(mc, 256, 0.5);
    REQUIRE(cpsd.freqs.size() == 129);
    REQUIRE(cpsd.matrices.size() == 129);
    for (const auto& m : cpsd.matrices) {
        CHECK((m - m.adjoint()).norm() == doctest::Approx(0.0));
        CHECK(m(0, 0).imag() == 0.0);
        CHECK(m(1, 1).imag() == 0.0);
        CHECK(m(0, 0).real() >= 0.0);
    }
}

TEST_CASE("proportional channels give a rank-one cpsd matrix") {
    auto base = white_noise(40000, 8);
    MultiChannel mc;
    mc.fs = 50.0;
    mc.channels.resize(3);
    for (double x : base.samples) {
        mc.channels[0].push_back(x);
        mc.channels[1].push_back(2.0 * x);
        mc.channels[2].push_back(-0.5 * x);
    }
    auto cpsd = cpsd_matrix(mc, 256, 0.5);
    auto sv = fdd_singular_values(cpsd, 3);
    REQUIRE(sv.values.size() == cpsd.freqs.size());
    for (std::size_t i = 1; i < sv.values.size(); ++i) {
        REQUIRE(sv.values[i].size() == 3);
        CHECK(sv.values[i][0] >= sv.values[i][1]);
        CHECK(sv.values[i][1] >= sv.values[i][2]);
        CHECK(sv.values[i][1] < 1e-10 * sv.values[i][0]);
    }
}

TEST_CASE("singular values sum to the matrix trace") {
    MultiChannel mc;
    mc.fs = 100.0;
    mc.channels = {white_noise(16384, 41).samples, white_noise(16384, 42).samples,
                   white_noise(16384, 43).samples};
    auto cpsd = cpsd_matrix(mc, 512, 0.5);
    auto sv = fdd_singular_values(cpsd, 3);
    for (std::size_t i = 0; i < cpsd.freqs.size(); ++i) {
        const double trace = cpsd.matrices[i].trace().real();
        const double sum = sv.values[i][0] + sv.values[i][1] + sv.values[i][2];
        CHECK(sum == doctest::Approx(trace).epsilon(1e-9));
    }
}

TEST_CASE("peak picking applies prominence and separation rules") {
    Spectrum spec;
    for (int i = 0; i <= 400; ++i) {
        const double f = static_cast<double>(i) * 0.1;
        double v = 1.0;
        v += 50.0 * std::exp(-std::pow((f - 10.0) / 0.3, 2.0));   // strong peak
        v += 30.0 * std::exp(-std::pow((f - 10.8) / 0.2, 2.0));   // merged neighbor
        v += 20.0 * std::exp(-std::pow((f - 25.0) / 0.3, 2.0));   // second keeper
        v += 0.8 * std::exp(-std::pow((f - 33.0) / 0.3, 2.0));    // below prominence
        spec.freqs.push_back(f);
        spec.values.push_back(v);
    }
    auto peaks = peak_pick(spec, 2.5, 2.0);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0] - 10.0) < 0.15);
    CHECK(std::abs(peaks[1] - 25.0) < 0.15);

    auto split = peak_pick(spec, 2.5, 0.3);
    CHECK(split.size() == 3);  // the 10.8 Hz neighbor survives without merging
}

TEST_CASE("fdd recovers the modes of a simulated two dof chain") {
    auto sys = build_chain(default_stiffness_2dof(), 0.01);
    auto forcing = white_noise(60000, 77);  // 600 s at 100 Hz
    forcing.fs = 100.0;
    auto record = simulate_rk4(sys, forcing);

    MultiChannel mc;
    mc.fs = 100.0;
    mc.channels = record.accelerations;
    auto cpsd = cpsd_matrix(mc, 1024, 0.5);
    auto sv = fdd_singular_values(cpsd, 2);

    Spectrum first;
    first.freqs = sv.freqs;
    for (const auto& row : sv.values) first.values.push_back(row[0]);
    auto peaks = peak_pick(first, 2.0, 1.0);

    REQUIRE(peaks.size() >= 2);
    double best1 = 1e9, best2 = 1e9;
    for (double p : peaks) {
        best1 = std::min(best1, std::abs(p - sys.natural_freqs_hz[0]));
        best2 = std::min(best2, std::abs(p - sys.natural_freqs_hz[1]));
    }
    CHECK(best1 < 0.5);
    CHECK(best2 < 0.5);
}
