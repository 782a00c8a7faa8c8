#include <doctest.h>

#include <cmath>

#include "cotdr/fiber.hpp"
#include "cotdr/timing.hpp"

using namespace cotdr;

TEST_SUITE_BEGIN("timing");

namespace {

ReflectionPeak peak_at(double position) {
    ReflectionPeak p;
    p.position = position;
    p.amplitude = 1.0;
    p.sigma_width = 40e-12;
    return p;
}

CoreDelayRecord record(const std::string& id, double delay, double temp = 20.0) {
    CoreDelayRecord r;
    r.core_id = id;
    r.one_way_delay_s = delay;
    r.temperature_c = temp;
    r.reference_peak = peak_at(1e-6);
    r.end_peak = peak_at(1e-6 + 2.0 * delay);
    return r;
}

}  // namespace

TEST_CASE("delay extraction arithmetic") {
    CHECK(extract_delay(peak_at(1.0e-6), peak_at(50.0e-6), 0.0) ==
          doctest::Approx(24.5e-6).epsilon(1e-12));
    CHECK(extract_delay(peak_at(1.0e-6), peak_at(50.0e-6), 10e-9) ==
          doctest::Approx(24.49e-6).epsilon(1e-12));
    CHECK_THROWS_AS(extract_delay(peak_at(1e-6), peak_at(1e-6), 0.0), SimulationError);
    CHECK_THROWS_AS(extract_delay(peak_at(1e-6), peak_at(1.0000001e-6), 1.0),
                    SimulationError);
}

TEST_CASE("skew map against the center core") {
    std::vector<CoreDelayRecord> records = {
        record("center", 24.4836e-6), record("a", 24.4836e-6 + 2.5e-9),
        record("b", 24.4836e-6 - 1.2e-9), record("c", 24.4836e-6 + 5.0e-9)};
    auto skew = compute_skew(records, "center");
    CHECK(skew.at("center") == 0.0);
    CHECK(skew.at("a") == doctest::Approx(2.5e-9).epsilon(1e-9));
    CHECK(skew.at("b") == doctest::Approx(-1.2e-9).epsilon(1e-9));
    CHECK(skew.at("c") == doctest::Approx(5.0e-9).epsilon(1e-9));
}

TEST_CASE("single core that is the center maps to zero") {
    auto skew = compute_skew({record("center", 1e-6)}, "center");
    REQUIRE(skew.size() == 1);
    CHECK(skew.at("center") == 0.0);
}

TEST_CASE("missing center core and mixed temperatures are rejected") {
    CHECK_THROWS_AS(compute_skew({record("a", 1e-6)}, "center"), std::invalid_argument);
    CHECK_THROWS_AS(
        compute_skew({record("center", 1e-6, 20.0), record("a", 1e-6, 21.0)}, "center"),
        std::invalid_argument);
}

TEST_CASE("skew antisymmetry when the reference core is swapped") {
    std::vector<CoreDelayRecord> records = {record("x", 10e-6),
                                            record("y", 10e-6 + 3.3e-9)};
    auto sx = compute_skew(records, "x");
    auto sy = compute_skew(records, "y");
    CHECK(sx.at("y") == -sy.at("x"));  // exact
}

TEST_CASE("common-mode delay cancels in the skew exactly") {
    std::vector<CoreDelayRecord> base = {record("center", 10e-6), record("a", 10.1e-6)};
    auto s0 = compute_skew(base, "center");
    for (auto& r : base) r.one_way_delay_s += 123.456e-9;
    auto s1 = compute_skew(base, "center");
    CHECK(s0.at("a") == s1.at("a"));
}

TEST_CASE("tdc regression recovers the configured coefficient") {
    CoreSpec core;
    core.core_id = "c";
    core.length_m = 5000.0;
    core.group_index = 1.468;
    core.tdc_ppm_per_k = 7.49;
    std::vector<std::pair<double, double>> series;
    for (double t : {10.0, 20.0, 30.0, 40.0, 50.0})
        series.emplace_back(t, delay_at_temperature(core, EnvironmentState{t, 10.0}));
    TdcFit fit = fit_tdc(series);
    CHECK(fit.slope_ppm_per_k == doctest::Approx(7.49).epsilon(1e-5));
    CHECK(fit.r_squared > 0.999999);

    // Anchoring the model at a different reference temperature barely moves
    // the normalized slope.
    series.clear();
    for (double t : {10.0, 20.0, 30.0, 40.0, 50.0})
        series.emplace_back(t, delay_at_temperature(core, EnvironmentState{t, 25.0}));
    CHECK(fit_tdc(series).slope_ppm_per_k == doctest::Approx(7.49).epsilon(2e-4));
}

TEST_CASE("constant delays give slope zero with a perfect fit") {
    std::vector<std::pair<double, double>> series = {
        {10.0, 1e-6}, {20.0, 1e-6}, {30.0, 1e-6}};
    TdcFit fit = fit_tdc(series);
    CHECK(fit.slope_ppm_per_k == 0.0);
    CHECK(fit.r_squared == 1.0);
}

TEST_CASE("tdc fit input validation") {
    CHECK_THROWS_AS(fit_tdc({{10.0, 1e-6}, {20.0, 1e-6}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_tdc({{10.0, 1e-6}, {10.0, 1.1e-6}, {10.0, 0.9e-6}}),
                    std::invalid_argument);
}

TEST_CASE("normalized skew is zero under equal tdc and drifts by the closed form") {
    CoreSpec a;
    a.core_id = "a";
    a.length_m = 5000.0;
    a.group_index = 1.468;
    a.tdc_ppm_per_k = 7.49;
    CoreSpec b = a;
    b.core_id = "b";

    std::vector<double> temps = {10.0, 20.0, 30.0, 40.0, 50.0};
    auto sweep_skews = [&](double tdc_b) {
        b.tdc_ppm_per_k = tdc_b;
        std::vector<std::map<std::string, double>> skews;
        for (double t : temps) {
            EnvironmentState env{t, 10.0};
            std::vector<CoreDelayRecord> recs = {
                record("a", delay_at_temperature(a, env), t),
                record("b", delay_at_temperature(b, env), t)};
            skews.push_back(compute_skew(recs, "a"));
        }
        return skew_vs_temperature(temps, skews);
    };

    auto equal = sweep_skews(7.49);
    for (double v : equal.at("b")) CHECK(std::abs(v) < 1e-18);

    auto split = sweep_skews(7.1);
    const double drift = split.at("b").back();
    const double closed_form = a.base_delay() * (7.1 - 7.49) * 1e-6 * 40.0;
    CHECK(drift == doctest::Approx(closed_form).epsilon(1e-9));
    CHECK(std::abs(std::abs(closed_form) - 381.944e-12) < 0.5e-12);
}

TEST_CASE("sweep table validation") {
    std::vector<std::map<std::string, double>> skews = {{{"a", 0.0}}, {{"b", 0.0}}};
    CHECK_THROWS_AS(skew_vs_temperature({10.0, 20.0}, skews), std::invalid_argument);
    std::vector<std::map<std::string, double>> ok = {{{"a", 0.0}}, {{"a", 1e-12}}};
    CHECK_THROWS_AS(skew_vs_temperature({20.0, 10.0}, ok), std::invalid_argument);
    CHECK_THROWS_AS(skew_vs_temperature({10.0}, ok), std::invalid_argument);
    auto table = skew_vs_temperature({10.0, 20.0}, ok);
    CHECK(table.at("a")[0] == 0.0);
    CHECK(table.at("a")[1] == doctest::Approx(1e-12));
}

TEST_SUITE_END();
