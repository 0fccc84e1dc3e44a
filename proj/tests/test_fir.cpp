#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ccfir/fir.hpp"
#include "ccfir/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <vector>

using namespace ccfir;

namespace {

// 20-node Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_20.
struct GaussLegendre {
    std::vector<double> nodes, weights;

    GaussLegendre() {
        const std::size_t m = 20;
        nodes.resize(m);
        weights.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(m) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= m; ++k) {
                    const double kd = static_cast<double>(k);
                    const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    double integrate(const std::function<double(double)>& f, double a, double b) const {
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 0.01)));
        const double h = (b - a) / pieces;
        double acc = 0.0;
        for (int piece = 0; piece < pieces; ++piece) {
            const double lo = a + h * piece;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                acc += weights[i] * f(lo + 0.5 * h * (nodes[i] + 1.0));
        }
        return acc * 0.5 * h;
    }
};

const GaussLegendre& quad() {
    static GaussLegendre gl;
    return gl;
}

double oracle_q(const std::vector<BandSpec>& bands, std::size_t n) {
    double acc = 0.0;
    for (const auto& band : bands)
        acc += quad().integrate(
            [&](double f) { return band.weight * std::cos(static_cast<double>(n) * M_PI * f); },
            band.f_a, band.f_b);
    return acc;
}

double oracle_b(const std::vector<BandSpec>& bands, std::size_t k) {
    double acc = 0.0;
    for (const auto& band : bands)
        acc += quad().integrate(
            [&](double f) {
                return band.weight * (band.d_slope * f + band.d_intercept) *
                       std::cos(static_cast<double>(k) * M_PI * f);
            },
            band.f_a, band.f_b);
    return acc;
}

// Independent design: numerically integrated normal equations, dense solve.
std::vector<double> oracle_design(const std::vector<BandSpec>& bands, std::size_t p) {
    const std::size_t half = (p - 1) / 2;
    Eigen::MatrixXd qm(half + 1, half + 1);
    Eigen::VectorXd rhs(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        for (std::size_t n = 0; n <= half; ++n) {
            double acc = 0.0;
            for (const auto& band : bands)
                acc += quad().integrate(
                    [&](double f) {
                        return band.weight * std::cos(static_cast<double>(k) * M_PI * f) *
                               std::cos(static_cast<double>(n) * M_PI * f);
                    },
                    band.f_a, band.f_b);
            qm(k, n) = acc;
        }
        rhs(k) = oracle_b(bands, k);
    }
    const Eigen::VectorXd a = qm.fullPivLu().solve(rhs);
    std::vector<double> taps(p, 0.0);
    taps[half] = a(0);
    for (std::size_t n = 1; n <= half; ++n) {
        taps[half + n] = 0.5 * a(n);
        taps[half - n] = taps[half + n];
    }
    return taps;
}

std::vector<BandSpec> random_bands(Rng& rng) {
    // partition [0, 1] into 3-6 weighted bands separated by narrow don't-care
    // transitions, the shape real designs take; wide unweighted gaps would
    // make the normal matrix arbitrarily ill conditioned
    const std::size_t n_bands = 3 + static_cast<std::size_t>(rng.uniform() * 4.0);
    std::vector<double> cuts{0.0, 1.0};
    while (cuts.size() < n_bands + 1) {
        const double c = rng.uniform(0.05, 0.95);
        bool ok = true;
        for (double prev : cuts)
            if (std::abs(c - prev) < 0.08) ok = false;
        if (ok) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<BandSpec> bands;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        BandSpec band;
        band.f_a = cuts[i] + (i == 0 ? 0.0 : rng.uniform(0.0, 0.015));
        band.f_b = cuts[i + 1] - (i + 2 == cuts.size() ? 0.0 : rng.uniform(0.0, 0.015));
        band.weight = rng.uniform(0.2, 2.0);
        if (rng.uniform() < 0.5) {
            band.d_intercept = rng.uniform(0.0, 1.0);
        } else {
            band.d_slope = rng.uniform(-1.0, 1.0);
            band.d_intercept = rng.uniform(0.0, 1.0);
        }
        bands.push_back(band);
    }
    return bands;
}

}  // namespace

TEST_CASE("closed-form q matches quadrature") {
    Rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        auto bands = random_bands(rng);
        for (std::size_t n : {0u, 1u, 2u, 5u, 17u, 50u, 100u})
            CHECK(lsfir_q(bands, n) == doctest::Approx(oracle_q(bands, n)).epsilon(1e-12));
    }
}

TEST_CASE("closed-form b matches quadrature for linear desired response") {
    Rng rng(202);
    for (int trial = 0; trial < 10; ++trial) {
        auto bands = random_bands(rng);
        for (std::size_t k : {0u, 1u, 3u, 10u, 25u, 50u})
            CHECK(lsfir_b(bands, k) == doctest::Approx(oracle_b(bands, k)).epsilon(1e-12));
    }
}

TEST_CASE("full-band unit desired response collapses to a delta") {
    std::vector<BandSpec> bands{{0.0, 1.0, 1.0, 0.0, 1.0}};
    auto filter = lsfir_design(bands, 21);
    for (std::size_t i = 0; i < 21; ++i) {
        const double expect = (i == 10) ? 1.0 : 0.0;
        CHECK(std::abs(filter.taps[i] - expect) < 1e-10);
    }
}

TEST_CASE("design matches the dense quadrature oracle") {
    Rng rng(303);
    for (std::size_t p : {11u, 51u, 101u}) {
        for (int trial = 0; trial < 20; ++trial) {
            auto bands = random_bands(rng);
            auto filter = lsfir_design(bands, p);
            auto ref = oracle_design(bands, p);
            double worst = 0.0;
            for (std::size_t i = 0; i < p; ++i)
                worst = std::max(worst, std::abs(filter.taps[i] - ref[i]));
            CHECK(worst < 1e-8);
        }
    }
}

TEST_CASE("paper-literal assembly doubles every tap") {
    auto bands = bandpass_bands(9.0, 11.0, 100.0);
    auto std_taps = lsfir_design(bands, 51, 100.0, false);
    auto lit_taps = lsfir_design(bands, 51, 100.0, true);
    for (std::size_t i = 0; i < 51; ++i)
        CHECK(lit_taps.taps[i] == doctest::Approx(2.0 * std_taps.taps[i]).epsilon(1e-12));
}

TEST_CASE("design rejects bad inputs") {
    std::vector<BandSpec> bands{{0.0, 1.0, 1.0, 0.0, 1.0}};
    CHECK_THROWS(lsfir_design(bands, 20));   // even
    CHECK_THROWS(lsfir_design({{0.0, 1.0, 0.0, 0.0, 1.0}}, 21));  // no weight
    CHECK_THROWS(lsfir_design({{0.5, 0.2, 1.0, 0.0, 1.0}}, 21));  // reversed edges
}

TEST_CASE("bandpass band layout in hertz") {
    auto bands = bandpass_bands(9.0, 11.0, 100.0);
    REQUIRE(bands.size() == 3);
    CHECK(bands[0].f_a == doctest::Approx(0.0));
    CHECK(bands[0].f_b == doctest::Approx(8.0 / 50.0));
    CHECK(bands[0].d_intercept == doctest::Approx(0.0));
    CHECK(bands[1].f_a == doctest::Approx(9.0 / 50.0));
    CHECK(bands[1].f_b == doctest::Approx(11.0 / 50.0));
    CHECK(bands[1].d_intercept == doctest::Approx(1.0));
    CHECK(bands[2].f_a == doctest::Approx(12.0 / 50.0));
    CHECK(bands[2].f_b == doctest::Approx(1.0));
}

TEST_CASE("ls bandpass meets a loose magnitude template") {
    auto filter = lsfir_design(bandpass_bands(9.0, 11.0, 100.0), 101, 100.0);
    auto resp = fir_response(filter, 2001);
    auto mag_at = [&](double f) {
        const std::size_t i = static_cast<std::size_t>(f / 50.0 * 2000.0 + 0.5);
        return resp.magnitude[i];
    };
    CHECK(mag_at(10.0) > 0.95);
    CHECK(mag_at(10.0) < 1.05);
    CHECK(mag_at(4.0) < 0.02);
    CHECK(mag_at(2.0) < 0.02);
    CHECK(mag_at(20.0) < 0.02);
    CHECK(mag_at(40.0) < 0.02);
}

TEST_CASE("window method produces a symmetric bandpass") {
    auto filter = window_method_bandpass(101, 8.0, 12.0, 100.0);
    REQUIRE(filter.taps.size() == 101);
    for (std::size_t i = 0; i < 101; ++i)
        CHECK(filter.taps[i] == filter.taps[100 - i]);
    auto resp = fir_response(filter, 2001);
    auto mag_at = [&](double f) {
        const std::size_t i = static_cast<std::size_t>(f / 50.0 * 2000.0 + 0.5);
        return resp.magnitude[i];
    };
    CHECK(mag_at(10.0) > 0.95);
    CHECK(mag_at(2.0) < 0.01);
    CHECK(mag_at(30.0) < 0.01);
}

TEST_CASE("symmetric filters have exactly linear phase") {
    auto filter = window_method_bandpass(51, 8.0, 12.0, 100.0);
    auto resp = fir_response(filter, 501);
    const double delay = 25.0;  // (p-1)/2 samples
    for (std::size_t i = 0; i < resp.freqs.size(); ++i) {
        const double w = 2.0 * M_PI * resp.freqs[i] / 100.0;
        // rotate the group delay out; the remainder must be purely real
        const std::complex<double> rotated =
            std::polar(resp.magnitude[i], resp.phase_rad[i] + w * delay);
        CHECK(std::abs(rotated.imag()) < 1e-9);
    }
}

TEST_CASE("fir apply is causal with left zero padding") {
    FirFilter delay2;
    delay2.fs = 1.0;
    delay2.taps = {0.0, 0.0, 1.0};
    TimeSeries ts;
    ts.fs = 1.0;
    ts.samples = {1.0, 2.0, 3.0, 4.0, 5.0};
    auto out = fir_apply(delay2, ts);
    REQUIRE(out.samples.size() == 5);
    CHECK(out.samples[0] == doctest::Approx(0.0));
    CHECK(out.samples[1] == doctest::Approx(0.0));
    CHECK(out.samples[2] == doctest::Approx(1.0));
    CHECK(out.samples[3] == doctest::Approx(2.0));
    CHECK(out.samples[4] == doctest::Approx(3.0));
}

TEST_CASE("fir apply respects convolution associativity") {
    Rng rng(404);
    FirFilter f1, f2;
    f1.fs = f2.fs = 1.0;
    for (int i = 0; i < 7; ++i) f1.taps.push_back(rng.normal());
    for (int i = 0; i < 5; ++i) f2.taps.push_back(rng.normal());

    FirFilter combined;
    combined.fs = 1.0;
    combined.taps.assign(7 + 5 - 1, 0.0);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 5; ++j) combined.taps[i + j] += f1.taps[i] * f2.taps[j];

    TimeSeries ts;
    ts.fs = 1.0;
    for (int i = 0; i < 64; ++i) ts.samples.push_back(rng.normal());

    auto chained = fir_apply(f2, fir_apply(f1, ts));
    auto direct = fir_apply(combined, ts);
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        CHECK(chained.samples[i] == doctest::Approx(direct.samples[i]).epsilon(1e-12));
}

TEST_CASE("fir csv roundtrip is lossless") {
    auto filter = lsfir_design(bandpass_bands(9.0, 11.0, 100.0), 51, 100.0);
    const std::string path = "test_fir_roundtrip.csv";
    write_fir_csv(path, filter);
    auto back = read_fir_csv(path);
    CHECK(back.fs == filter.fs);
    REQUIRE(back.taps.size() == filter.taps.size());
    for (std::size_t i = 0; i < filter.taps.size(); ++i)
        CHECK(back.taps[i] == filter.taps[i]);
    std::remove(path.c_str());
}
