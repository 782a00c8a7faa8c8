#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cotdr/config.hpp"
#include "cotdr/experiment.hpp"

using namespace cotdr;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("config_cli");

namespace {

const char* kSmallConfig = R"({
  "fiber": {
    "name": "small",
    "center_core_id": "a",
    "reference_reflector_delay_s": 5.0e-08,
    "reference_reflectance": 0.04,
    "backscatter_level": 0.0,
    "cores": [
      {"id": "a", "position_um": [0, 0], "length_m": 150.0, "skew_offset_s": 0.0,
       "pmd": {"mean_dgd_s": 2.0e-12, "n_segments": 40, "seed": 5}},
      {"id": "b", "position_um": [41.1, 0], "length_m": 150.0, "skew_offset_s": 7.5e-10}
    ]
  },
  "probe": {"prbs_order": 9, "prbs_seed": 1, "bit_rate_hz": 1.0e10,
            "fill_duration_s": 3.0e-06, "rise_time_s": 3.0e-11},
  "receiver": {"sample_rate_hz": 2.0e10, "noise_sigma": 2.0e-03, "frontend": "adc7",
               "n_traces": 50, "adc_bits": 7},
  "analysis": {"min_separation_s": 1.0e-09, "assignment_window_s": 1.0e-09}
})";

fs::path test_dir() {
    fs::path dir = fs::temp_directory_path() / "cotdr_cli_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_small_config() {
    fs::path p = test_dir() / "small.json";
    std::ofstream(p) << kSmallConfig;
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(COTDR_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config json round-trips through the struct") {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(kSmallConfig));
    CHECK(cfg.fiber.cores.size() == 2);
    CHECK(cfg.fiber.core("b").skew_offset_s == doctest::Approx(7.5e-10));
    CHECK(cfg.receiver.n_traces == 50);
    CHECK(cfg.probe.prbs_order == 9);
    CHECK(cfg.fiber.core("a").birefringence.has_value());

    nlohmann::json j1 = config_to_json(cfg);
    nlohmann::json j2 = config_to_json(config_from_json(j1));
    CHECK(j1.dump() == j2.dump());
}

TEST_CASE("parse errors carry the line number") {
    fs::path p = test_dir() / "broken.json";
    std::ofstream(p) << "{\n  \"fiber\": {\n  they broke it\n}\n";
    try {
        load_config(p);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("semantic errors carry the json path") {
    nlohmann::json j = nlohmann::json::parse(kSmallConfig);
    j["fiber"].erase("center_core_id");
    try {
        config_from_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("fiber.center_core_id") != std::string::npos);
    }
    j = nlohmann::json::parse(kSmallConfig);
    j["receiver"]["frontend"] = "dsp";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
    j = nlohmann::json::parse(kSmallConfig);
    j["fiber"]["cores"][0]["length_m"] = "long";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("library pipeline recovers the configured skew on a small fiber") {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(kSmallConfig));
    MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.seed = 11;
    SkewResult res = measure_skew(cfg.fiber, cfg.environment, opt);
    REQUIRE(res.failed_cores.empty());
    CHECK(res.skew_s.at("a") == 0.0);
    CHECK(std::abs(res.skew_s.at("b") - 7.5e-10) < 10e-12);
    const double tau = cfg.fiber.core("a").base_delay();
    CHECK(std::abs(res.delay_s.at("a") - tau) < 10e-12);
}

TEST_CASE("consecutive shots with cabinet drift corrupt the skew") {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(kSmallConfig));
    MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.seed = 3;

    SkewResult sim = measure_skew(cfg.fiber, cfg.environment, opt,
                                  MeasurementMode::simultaneous);
    SkewResult con = measure_skew(cfg.fiber, cfg.environment, opt,
                                  MeasurementMode::consecutive, 5.0);
    const double err_sim = std::abs(sim.skew_s.at("b") - 7.5e-10);
    const double err_con = std::abs(con.skew_s.at("b") - 7.5e-10);
    // 5 K of drift between the two shots: tau * 7.49e-6 * 5 ~ 27 ps of error.
    CHECK(err_sim < 5e-12);
    CHECK(err_con > 15e-12);
    CHECK(err_con < 60e-12);
}

TEST_CASE("per-temperature delay jitter shows up in the normalized skew") {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(kSmallConfig));
    cfg.fiber.delay_jitter_sigma_s = 10e-12;
    MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.seed = 4;
    MeasurementReport rep =
        run_temperature_sweep(cfg.fiber, cfg.sweep, cfg.environment, opt);
    // Paper-scale sigma ~ 10 ps per step: peak-to-peak lands in the tens of ps.
    const double p2p = rep.skew_p2p_s.at("b");
    CHECK(p2p > 5e-12);
    CHECK(p2p < 150e-12);

    cfg.fiber.delay_jitter_sigma_s = 0.0;
    MeasurementReport quiet =
        run_temperature_sweep(cfg.fiber, cfg.sweep, cfg.environment, opt);
    CHECK(quiet.skew_p2p_s.at("b") < 2e-12);
}

TEST_CASE("exact per-trace frontends agree with the fast paths") {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(kSmallConfig));
    MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.seed = 5;

    SkewResult fast = measure_skew(cfg.fiber, cfg.environment, opt);
    opt.receiver.exact_frontend = true;
    SkewResult exact = measure_skew(cfg.fiber, cfg.environment, opt);
    CHECK(std::abs(fast.delay_s.at("a") - exact.delay_s.at("a")) < 5e-12);
    CHECK(std::abs(fast.skew_s.at("b") - exact.skew_s.at("b")) < 5e-12);

    opt.receiver.frontend = FrontendKind::slicer1;
    opt.receiver.exact_frontend = false;
    SkewResult sfast = measure_skew(cfg.fiber, cfg.environment, opt);
    opt.receiver.exact_frontend = true;
    SkewResult sexact = measure_skew(cfg.fiber, cfg.environment, opt);
    CHECK(std::abs(sfast.delay_s.at("a") - sexact.delay_s.at("a")) < 20e-12);
}

TEST_CASE("slicer can sample at the transceiver bit rate") {
    ExperimentConfig cfg = config_from_json(nlohmann::json::parse(kSmallConfig));
    MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.receiver.frontend = FrontendKind::slicer1;
    opt.receiver.slicer_sample_rate_hz = 1.0e10;  // 100 ps slots from 20 GS/s
    opt.seed = 6;
    SkewResult res = measure_skew(cfg.fiber, cfg.environment, opt);
    REQUIRE(res.failed_cores.empty());
    const double tau = cfg.fiber.core("a").base_delay();
    CHECK(std::abs(res.delay_s.at("a") - tau) < 50e-12);  // half a 100 ps slot
    CHECK(std::abs(res.skew_s.at("b") - 7.5e-10) < 100e-12);

    opt.receiver.slicer_sample_rate_hz = 0.9e10;  // not an integer divisor
    CHECK_THROWS_AS(measure_skew(cfg.fiber, cfg.environment, opt), ConfigError);
}

TEST_CASE("grouped measurement recovers every skew of the bundled 19-core fiber") {
    ExperimentConfig cfg =
        load_config(fs::path(COTDR_CONFIG_DIR) / "mcf19_5km.json");
    // Lighter probe for test runtime; the acceptance suite runs full scale.
    cfg.probe.prbs_order = 11;
    cfg.receiver.sample_rate_hz = 2.0e10;
    cfg.receiver.n_traces = 200;
    MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.seed = 8;
    SkewResult res = measure_skew(cfg.fiber, cfg.environment, opt);
    REQUIRE(res.failed_cores.empty());
    REQUIRE(res.skew_s.size() == 19);
    for (const auto& core : cfg.fiber.cores)
        CHECK(std::abs(res.skew_s.at(core.core_id) - core.skew_offset_s) < 5e-12);
}

TEST_CASE("cli: missing config exits 2") {
    CHECK(run_cli("skew --config /nonexistent.json --out /tmp/cotdr_nowhere") == 2);
}

TEST_CASE("cli: malformed config exits 2") {
    fs::path p = test_dir() / "bad.json";
    std::ofstream(p) << "{ nope";
    CHECK(run_cli("skew --config " + p.string() + " --out " + (test_dir() / "o").string()) == 2);
}

TEST_CASE("cli: selftest passes") {
    CHECK(run_cli("selftest") == 0);
}

TEST_CASE("cli skew run: outputs, determinism, manifest rerun") {
    fs::path cfg = write_small_config();
    fs::path out1 = test_dir() / "run1";
    fs::path out2 = test_dir() / "run2";
    fs::path out3 = test_dir() / "run3";
    fs::remove_all(out1);
    fs::remove_all(out2);
    fs::remove_all(out3);

    REQUIRE(run_cli("skew --config " + cfg.string() + " --out " + out1.string() +
                    " --seed 42") == 0);
    CHECK(fs::exists(out1 / "report.json"));
    CHECK(fs::exists(out1 / "skew.csv"));
    CHECK(fs::exists(out1 / "manifest.json"));

    REQUIRE(run_cli("skew --config " + cfg.string() + " --out " + out2.string() +
                    " --seed 42") == 0);
    CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
    CHECK(slurp(out1 / "skew.csv") == slurp(out2 / "skew.csv"));

    // Replaying the manifest reproduces the run byte for byte.
    REQUIRE(run_cli("rerun --manifest " + (out1 / "manifest.json").string() + " --out " +
                    out3.string()) == 0);
    CHECK(slurp(out1 / "report.json") == slurp(out3 / "report.json"));
    CHECK(slurp(out1 / "skew.csv") == slurp(out3 / "skew.csv"));

    // Different seed changes the bytes (noise is seeded).
    fs::path out4 = test_dir() / "run4";
    REQUIRE(run_cli("skew --config " + cfg.string() + " --out " + out4.string() +
                    " --seed 43") == 0);
    CHECK(slurp(out1 / "report.json") != slurp(out4 / "report.json"));
}

TEST_CASE("cli trace run writes the correlation and peak tables") {
    fs::path cfg = write_small_config();
    fs::path out = test_dir() / "trace";
    fs::remove_all(out);
    REQUIRE(run_cli("trace --config " + cfg.string() + " --out " + out.string() +
                    " --stride 50") == 0);
    CHECK(fs::exists(out / "correlation.csv"));
    const std::string peaks = slurp(out / "peaks.csv");
    CHECK(peaks.find("reference,") != std::string::npos);
    CHECK(peaks.find("a,") != std::string::npos);
    CHECK(peaks.find("b,") != std::string::npos);
}

TEST_CASE("cli pmd run writes the summary and per-core curves") {
    fs::path cfg = write_small_config();
    fs::path out = test_dir() / "pmd";
    fs::remove_all(out);
    REQUIRE(run_cli("pmd --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "pmd_summary.json"));
    CHECK(fs::exists(out / "dgd_a.csv"));   // only core a carries a pmd model
    CHECK(!fs::exists(out / "dgd_b.csv"));
}

TEST_CASE("cli slicer frontend override works end to end") {
    fs::path cfg = write_small_config();
    fs::path out = test_dir() / "slicer";
    fs::remove_all(out);
    REQUIRE(run_cli("skew --config " + cfg.string() + " --out " + out.string() +
                    " --frontend slicer1 --traces 400 --seed 7") == 0);
    const std::string report = slurp(out / "report.json");
    CHECK(report.find("\"skew_s\"") != std::string::npos);
}

TEST_SUITE_END();
