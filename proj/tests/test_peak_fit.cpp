#include <doctest.h>

#include <cmath>

#include "cotdr/fft.hpp"
#include "cotdr/peak_fit.hpp"

using namespace cotdr;

TEST_SUITE_BEGIN("peak_fit");

namespace {

AnalogTrace make_trace(std::vector<double> v, double fs = 1.0, double t0 = 0.0) {
    AnalogTrace t;
    t.samples = std::move(v);
    t.sample_rate = fs;
    t.t0 = t0;
    return t;
}

AnalogTrace triangle_trace(std::size_t n, double center, double half_width,
                           double fs = 1.0) {
    AnalogTrace t = make_trace(std::vector<double>(n, 0.0), fs);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(static_cast<double>(i) - center);
        t.samples[i] = std::max(0.0, 1.0 - d / half_width);
    }
    return t;
}

}  // namespace

TEST_CASE("flat trace has no peaks") {
    AnalogTrace t = make_trace(std::vector<double>(256, 0.0));
    CHECK(detect_peaks(t, 6.0, 0.0).empty());
}

TEST_CASE("well separated peaks are both reported") {
    AnalogTrace t = make_trace(std::vector<double>(400, 0.0), 1e9);  // 1 ns samples
    t.samples[100] = 1.0;
    t.samples[110] = 0.8;  // 10 ns apart
    auto peaks = detect_peaks(t, 6.0, 1e-9);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0] == 100);
    CHECK(peaks[1] == 110);
}

TEST_CASE("close peaks: only the taller survives suppression") {
    AnalogTrace t = make_trace(std::vector<double>(400, 0.0), 1e9);
    t.samples[200] = 1.0;
    t.samples[202] = 0.9;  // 2 ns apart, min separation 5 ns
    auto peaks = detect_peaks(t, 6.0, 5e-9);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == 200);
}

TEST_CASE("plateau ties resolve to the earlier sample") {
    AnalogTrace t = make_trace(std::vector<double>(64, 0.0));
    t.samples[30] = 1.0;
    t.samples[31] = 1.0;
    auto peaks = detect_peaks(t, 6.0, 0.0);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == 30);
}

TEST_CASE("threshold must be positive") {
    AnalogTrace t = make_trace(std::vector<double>(16, 0.0));
    CHECK_THROWS_AS(detect_peaks(t, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("exact gaussian is recovered to solver precision") {
    AnalogTrace t = make_trace(std::vector<double>(64, 0.0));
    const double mu = 17.30, s = 2.0;
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        const double d = static_cast<double>(i) - mu;
        t.samples[i] = std::exp(-d * d / (2.0 * s * s));
    }
    ReflectionPeak p = fit_gaussian(t, 17, 6);
    CHECK(std::abs(p.position - mu) < 1e-6);
    CHECK(p.amplitude == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(p.sigma_width == doctest::Approx(s).epsilon(1e-5));
    CHECK(p.rms_residual < 1e-8);
}

TEST_CASE("symmetric triangular peak at an integer center fits exactly there") {
    AnalogTrace t = triangle_trace(256, 128.0, 5.0);
    ReflectionPeak p = fit_gaussian(t, 128);
    CHECK(std::abs(p.position - 128.0) < 1e-9);
}

TEST_CASE("quarter-sample band-limited shift recovered within 2 ps at 20 ps/sample") {
    // Fig. 2b-style scenario: triangular correlation peak, fractional shift.
    AnalogTrace tri = triangle_trace(256, 128.0, 5.0, 50e9);
    AnalogTrace shifted = fft::delay_trace(tri, 0.25 / 50e9);
    ReflectionPeak p = fit_gaussian(shifted, 128);
    const double expected = (128.0 + 0.25) / 50e9;
    CHECK(std::abs(p.position - expected) <= 2e-12);
}

TEST_CASE("shift equivariance within 0.05 sample over |delta| <= 0.5") {
    AnalogTrace tri = triangle_trace(256, 128.0, 5.0, 1.0);
    const double base = fit_gaussian(tri, 128).position;
    for (double delta : {-0.5, -0.37, -0.2, -0.05, 0.1, 0.25, 0.4, 0.5}) {
        AnalogTrace shifted = fft::delay_trace(tri, delta);
        std::size_t cmax = 0;
        for (std::size_t i = 1; i < shifted.samples.size(); ++i)
            if (shifted.samples[i] > shifted.samples[cmax]) cmax = i;
        ReflectionPeak p = fit_gaussian(shifted, cmax);
        CHECK(std::abs(p.position - (base + delta)) <= 0.05);
    }
}

TEST_CASE("scaling the window leaves the position and scales the amplitude") {
    AnalogTrace tri = triangle_trace(256, 128.0, 5.0);
    ReflectionPeak p1 = fit_gaussian(tri, 128, 4);
    AnalogTrace big = tri;
    for (auto& v : big.samples) v *= 37.5;
    ReflectionPeak p2 = fit_gaussian(big, 128, 4);
    CHECK(std::abs(p2.position - p1.position) <= 1e-9);
    CHECK(p2.amplitude / p1.amplitude == doctest::Approx(37.5).epsilon(1e-9));
}

TEST_CASE("window validation") {
    AnalogTrace tri = triangle_trace(64, 32.0, 5.0);
    CHECK_THROWS_AS(fit_gaussian(tri, 2, 5), std::invalid_argument);   // outside
    CHECK_THROWS_AS(fit_gaussian(tri, 32, 1), std::invalid_argument);  // < 5 samples
    CHECK_THROWS_AS(fit_gaussian(tri, 30, 4), std::invalid_argument);  // not the max
}

TEST_CASE("valleys and flat windows raise FitError") {
    AnalogTrace t = make_trace(std::vector<double>(64, 1.0));
    CHECK_THROWS_AS(fit_gaussian(t, 32, 4), FitError);

    // A flat-topped plateau has no log-space curvature for the parabola init.
    AnalogTrace plateau = make_trace(std::vector<double>(64, 0.0));
    plateau.samples[29] = plateau.samples[30] = plateau.samples[31] = 1.0;
    CHECK_THROWS_AS(fit_gaussian(plateau, 30, 3), FitError);
}

TEST_CASE("non-convergence carries the parabola estimate as a fallback") {
    // Rough data with a maximum but nothing Gaussian to settle on.
    AnalogTrace t = make_trace({0.133877, 0.136407, 0.451215, 0.021024, 0.350898,
                                0.911358, 0.470752, 1.011358, 0.569847, 0.635231,
                                0.089453, 0.556179, 0.789652, 0.221634, 0.418669,
                                0.249778});
    try {
        fit_gaussian(t, 7, 3);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        REQUIRE(e.fallback.has_value());
        CHECK(e.fallback->position > 4.0);
        CHECK(e.fallback->position < 10.0);
        CHECK(e.fallback->amplitude > 0.0);
        CHECK(e.fallback->sigma_width > 0.0);
    }
}

TEST_CASE("time axis mapping uses t0 and the sample rate") {
    AnalogTrace tri = triangle_trace(256, 100.0, 5.0, 50e9);
    tri.t0 = -1e-6;
    ReflectionPeak p = fit_gaussian(tri, 100);
    CHECK(p.position == doctest::Approx(-1e-6 + 100.0 / 50e9).epsilon(1e-12));
    CHECK(p.sigma_width > 0.0);
    CHECK(p.window_first <= 100);
    CHECK(p.window_last >= 100);
}

TEST_SUITE_END();
