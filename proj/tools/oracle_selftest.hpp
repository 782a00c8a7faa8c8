// Built-in oracle checks for `cotdr selftest`: quick independently-derived
// expectations evaluated against the library, no config required.
#pragma once

#include <array>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "cotdr/correlator.hpp"
#include "cotdr/fft.hpp"
#include "cotdr/fiber.hpp"
#include "cotdr/frontend.hpp"
#include "cotdr/peak_fit.hpp"
#include "cotdr/pmd.hpp"
#include "cotdr/rng.hpp"
#include "cotdr/sequence.hpp"

namespace cotdr {

namespace selftest_detail {

inline bool report(std::ostream& os, const char* name, bool ok) {
    os << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    return ok;
}

// Stokes-space PMD-vector concatenation, independent of the Jones path.
inline double stokes_dgd(const CorePolarizationModel& model, double wavelength_m) {
    const double omega = 2.0 * std::numbers::pi * 299792458.0 / wavelength_m;
    std::array<double, 3> om{0.0, 0.0, 0.0};
    for (const auto& seg : model.segments) {
        const std::array<double, 3> axis{std::cos(2.0 * seg.axis_angle_rad),
                                         std::sin(2.0 * seg.axis_angle_rad), 0.0};
        const double ang = omega * seg.dgd_s + 2.0 * seg.phase_offset_rad;
        const double c = std::cos(ang), s = std::sin(ang);
        const double dot = axis[0] * om[0] + axis[1] * om[1] + axis[2] * om[2];
        const std::array<double, 3> cross{axis[1] * om[2] - axis[2] * om[1],
                                          axis[2] * om[0] - axis[0] * om[2],
                                          axis[0] * om[1] - axis[1] * om[0]};
        for (int i = 0; i < 3; ++i)
            om[i] = om[i] * c + cross[i] * s + axis[i] * dot * (1.0 - c) +
                    seg.dgd_s * axis[i];
    }
    return std::sqrt(om[0] * om[0] + om[1] * om[1] + om[2] * om[2]);
}

}  // namespace selftest_detail

inline bool run_selftest(std::ostream& os) {
    using selftest_detail::report;
    bool all = true;

    {
        BitSequence s = generate_prbs(7, 1);
        int ones = 0;
        for (bool b : s.bits) ones += b ? 1 : 0;
        bool ok = s.length() == 127 && ones == 64;
        double ac1 = 0.0;
        for (std::size_t i = 0; i < 127; ++i)
            ac1 += (s.bits[i] ? 1.0 : -1.0) * (s.bits[(i + 1) % 127] ? 1.0 : -1.0);
        ok = ok && std::abs(ac1 + 1.0) < 1e-12;
        all &= report(os, "prbs-7: period 127, 64 ones, autocorrelation -1", ok);
    }
    {
        CoreSpec core;
        core.core_id = "c";
        core.length_m = 5000.0;
        core.group_index = 1.468;
        core.tdc_ppm_per_k = 7.49;
        EnvironmentState env{20.0, 20.0};
        const double tau = delay_at_temperature(core, env);
        const double step =
            delay_at_temperature(core, EnvironmentState{30.0, 20.0}) - tau;
        bool ok = std::abs(tau - 24.483604588e-6) < 1e-12 &&
                  std::abs(step - 1.833822e-9) < 1e-14;
        all &= report(os, "delay model: 24.4836 us base, 1.8338 ns per 10 K", ok);
    }
    {
        AnalogTrace t;
        t.sample_rate = 1.0;
        t.samples.resize(64);
        for (std::size_t i = 0; i < 64; ++i) {
            const double d = static_cast<double>(i) - 17.30;
            t.samples[i] = std::exp(-d * d / 8.0);
        }
        ReflectionPeak p = fit_gaussian(t, 17, 6);
        all &= report(os, "gaussian fit: exact model recovered to 1e-6 samples",
                      std::abs(p.position - 17.30) < 1e-6);
    }
    {
        AnalogTrace tri;
        tri.sample_rate = 50e9;
        tri.samples.assign(256, 0.0);
        for (std::size_t i = 0; i < 256; ++i)
            tri.samples[i] =
                std::max(0.0, 1.0 - std::abs(static_cast<double>(i) - 128.0) / 5.0);
        AnalogTrace shifted = fft::delay_trace(tri, 0.25 / 50e9);
        ReflectionPeak p = fit_gaussian(shifted, 128);
        all &= report(os, "sub-sample timing: +0.25 sample shift within 2 ps",
                      std::abs(p.position - 128.25 / 50e9) < 2e-12);
    }
    {
        auto rng = make_rng({4242});
        std::normal_distribution<double> nd(0.0, 1.0);
        AnalogTrace x, k;
        x.sample_rate = k.sample_rate = 1.0;
        x.samples.resize(512);
        k.samples.resize(96);
        for (auto& v : x.samples) v = nd(rng);
        for (auto& v : k.samples) v = nd(rng);
        AnalogTrace fast = cross_correlate(x, k);
        bool ok = true;
        double scale = 0.0;
        for (std::ptrdiff_t j = -(95); j < 512; ++j) {
            double acc = 0.0;
            for (std::ptrdiff_t i = 0; i < 96; ++i)
                if (i + j >= 0 && i + j < 512)
                    acc += k.samples[static_cast<std::size_t>(i)] *
                           x.samples[static_cast<std::size_t>(i + j)];
            scale = std::max(scale, std::abs(acc));
            ok = ok && std::abs(acc - fast.samples[static_cast<std::size_t>(j + 95)]) <
                           1e-9 * 512;
        }
        all &= report(os, "correlator: fft path matches direct evaluation", ok);
    }
    {
        AnalogTrace level;
        level.sample_rate = 1.0;
        level.samples.assign(4000, 0.5 + 0.8416 * 0.05);
        AccumulatedTrace acc = accumulate_binomial(level, 0.05, 0.5, 1000, 7);
        double m = 0.0;
        for (auto s : acc.sums) m += s;
        m /= 4000.0;
        all &= report(os, "slicer accumulation: mean near 1000 * Phi(0.8416) ~= 800",
                      std::abs(m - 800.0) < 3.0);
    }
    {
        CorePolarizationModel m;
        m.segments = {{1e-12, 0.0, 0.0}, {1e-12, std::numbers::pi / 4.0, 0.0}};
        const double jme = dgd_jme(m, 1550e-9, 2.0 * std::numbers::pi * 1e9);
        const double stokes = selftest_detail::stokes_dgd(m, 1550e-9);
        bool ok = std::abs(jme - std::sqrt(2.0) * 1e-12) < 1e-17 &&
                  std::abs(stokes - std::sqrt(2.0) * 1e-12) < 1e-17;
        all &= report(os, "pmd: two-segment dgd sqrt(2) ps by two routes", ok);
    }
    return all;
}

}  // namespace cotdr
