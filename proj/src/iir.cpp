#include "ccfir/iir.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace ccfir {

namespace {

using cplx = std::complex<double>;

struct Zpk {
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
    double gain = 1.0;
};

// Analog Chebyshev type II lowpass prototype, stopband edge at 1 rad/s.
Zpk cheb2_prototype(std::size_t order, double atten_db) {
    const auto n = static_cast<int>(order);
    const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * atten_db) - 1.0);
    const double mu = std::asinh(1.0 / de) / static_cast<double>(n);

    Zpk zpk;
    for (int m = -n + 1; m <= n - 1; m += 2) {
        const double theta = M_PI * static_cast<double>(m) / (2.0 * static_cast<double>(n));
        if (m != 0) zpk.zeros.push_back(std::conj(cplx(0.0, 1.0) / std::sin(theta)));
        cplx p = -std::exp(cplx(0.0, theta));
        p = cplx(std::sinh(mu) * p.real(), std::cosh(mu) * p.imag());
        zpk.poles.push_back(1.0 / p);
    }
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const auto& p : zpk.poles) num *= -p;
    for (const auto& z : zpk.zeros) den *= -z;
    zpk.gain = (num / den).real();
    return zpk;
}

Zpk lp_to_bandpass(const Zpk& lp, double wo, double bw) {
    Zpk bp;
    const std::size_t degree = lp.poles.size() - lp.zeros.size();
    auto transform = [&](const cplx& s) {
        const cplx s_scaled = s * bw / 2.0;
        const cplx d = std::sqrt(s_scaled * s_scaled - wo * wo);
        return std::pair<cplx, cplx>(s_scaled + d, s_scaled - d);
    };
    for (const auto& z : lp.zeros) {
        auto [a, b] = transform(z);
        bp.zeros.push_back(a);
        bp.zeros.push_back(b);
    }
    for (const auto& p : lp.poles) {
        auto [a, b] = transform(p);
        bp.poles.push_back(a);
        bp.poles.push_back(b);
    }
    for (std::size_t i = 0; i < degree; ++i) bp.zeros.emplace_back(0.0, 0.0);
    bp.gain = lp.gain * std::pow(bw, static_cast<double>(degree));
    return bp;
}

Zpk bilinear(const Zpk& analog, double fs) {
    const double fs2 = 2.0 * fs;
    Zpk dig;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const auto& z : analog.zeros) {
        dig.zeros.push_back((fs2 + z) / (fs2 - z));
        num *= (fs2 - z);
    }
    for (const auto& p : analog.poles) {
        dig.poles.push_back((fs2 + p) / (fs2 - p));
        den *= (fs2 - p);
    }
    const std::size_t degree = analog.poles.size() - analog.zeros.size();
    for (std::size_t i = 0; i < degree; ++i) dig.zeros.emplace_back(-1.0, 0.0);
    dig.gain = analog.gain * (num / den).real();
    return dig;
}

// Group roots into conjugate pairs (plus paired-up reals; a leftover real
// becomes a singleton handled as a first-order section).
std::vector<std::vector<cplx>> conjugate_groups(std::vector<cplx> roots) {
    constexpr double tol = 1e-9;
    std::vector<std::vector<cplx>> groups;
    std::vector<cplx> reals;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        if (std::abs(roots[i].imag()) <= tol * std::max(1.0, std::abs(roots[i]))) {
            reals.push_back(cplx(roots[i].real(), 0.0));
            used[i] = true;
            continue;
        }
        std::size_t best = roots.size();
        double best_d = 1e300;
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(roots[j] - std::conj(roots[i]));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best == roots.size())
            throw std::runtime_error("cheby2_bandpass: unmatched complex root");
        groups.push_back({roots[i], roots[best]});
        used[i] = used[best] = true;
    }
    std::sort(reals.begin(), reals.end(),
              [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
        groups.push_back({reals[i], reals[i + 1]});
    if (reals.size() % 2 == 1) groups.push_back({reals.back()});
    return groups;
}

}  // namespace

bool IirCascade::stable() const {
    for (const auto& s : sections) {
        // roots of z^2 + a1 z + a2
        const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        const cplx r1 = (-s.a1 + disc) / 2.0;
        const cplx r2 = (-s.a1 - disc) / 2.0;
        if (std::abs(r1) >= 1.0 || std::abs(r2) >= 1.0) return false;
    }
    return true;
}

std::complex<double> IirCascade::response_at(double freq_hz) const {
    const double w = 2.0 * M_PI * freq_hz / fs;
    const cplx e1 = std::polar(1.0, -w);
    const cplx e2 = e1 * e1;
    cplx h(1.0, 0.0);
    for (const auto& s : sections)
        h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
    return h;
}

IirCascade cheby2_bandpass(std::size_t order, double atten_db,
                           double f_lo, double f_hi, double fs) {
    if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0))
        throw std::invalid_argument("cheby2_bandpass: need 0 < f_lo < f_hi < fs/2");
    if (order < 1) throw std::invalid_argument("cheby2_bandpass: order must be >= 1");

    // prewarped analog band edges
    const double w1 = 2.0 * fs * std::tan(M_PI * f_lo / fs);
    const double w2 = 2.0 * fs * std::tan(M_PI * f_hi / fs);
    const double wo = std::sqrt(w1 * w2);
    const double bw = w2 - w1;

    const Zpk proto = cheb2_prototype(order, atten_db);
    const Zpk analog = lp_to_bandpass(proto, wo, bw);
    const Zpk digital = bilinear(analog, fs);

    auto pole_groups = conjugate_groups(digital.poles);
    auto zero_groups = conjugate_groups(digital.zeros);

    // pair each pole group (nearest to unit circle first) with its closest zero group
    std::sort(pole_groups.begin(), pole_groups.end(),
              [](const auto& a, const auto& b) {
                  auto radius = [](const std::vector<cplx>& g) {
                      double r = 0.0;
                      for (const auto& x : g) r = std::max(r, std::abs(x));
                      return r;
                  };
                  return radius(a) > radius(b);
              });

    IirCascade cascade;
    cascade.fs = fs;
    std::vector<bool> zero_used(zero_groups.size(), false);
    for (const auto& pg : pole_groups) {
        std::size_t best = zero_groups.size();
        double best_d = 1e300;
        for (std::size_t j = 0; j < zero_groups.size(); ++j) {
            if (zero_used[j]) continue;
            const double d = std::abs(zero_groups[j][0] - pg[0]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        Biquad s;
        if (best != zero_groups.size()) {
            zero_used[best] = true;
            const auto& zg = zero_groups[best];
            if (zg.size() == 2) {
                s.b1 = -(zg[0] + zg[1]).real();
                s.b2 = (zg[0] * zg[1]).real();
            } else {
                s.b1 = -zg[0].real();
            }
        }
        if (pg.size() == 2) {
            s.a1 = -(pg[0] + pg[1]).real();
            s.a2 = (pg[0] * pg[1]).real();
        } else {
            s.a1 = -pg[0].real();
        }
        cascade.sections.push_back(s);
    }
    if (!cascade.sections.empty()) {
        auto& first = cascade.sections.front();
        first.b0 *= digital.gain;
        first.b1 *= digital.gain;
        first.b2 *= digital.gain;
    }
    if (!cascade.stable())
        throw std::runtime_error("cheby2_bandpass: designed cascade is unstable");
    return cascade;
}

TimeSeries iir_filter(const IirCascade& cascade, const TimeSeries& ts) {
    if (cascade.fs != ts.fs) throw std::invalid_argument("iir_filter: sampling rate mismatch");
    TimeSeries out = ts;
    for (const auto& s : cascade.sections) {
        double z1 = 0.0, z2 = 0.0;
        for (auto& x : out.samples) {
            const double in = x;
            const double y = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * y + z2;
            z2 = s.b2 * in - s.a2 * y;
            x = y;
        }
    }
    return out;
}

}  // namespace ccfir
