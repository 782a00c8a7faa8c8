// Experiment runner: config in, traces / reports / plot tables out.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <fftw3.h>

#include "cotdr/experiment.hpp"
#include "cotdr/fft.hpp"
#include "cotdr/frontend.hpp"
#include "cotdr/report.hpp"
#include "cotdr/rng.hpp"
#include "cotdr/sequence.hpp"
#include "oracle_selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string frontend;       // empty: keep config
    std::int64_t traces = -1;   // <0: keep config
    double sample_rate = 0.0;   // <=0: keep config
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", flags.out_dir, "output directory")->required();
    cmd->add_option("--seed", flags.seed, "random seed (default 0)");
    cmd->add_option("--frontend", flags.frontend, "receiver model: adc7 | slicer1")
        ->check(CLI::IsMember({"adc7", "slicer1"}));
    cmd->add_option("--traces", flags.traces, "averaging count (default from config)");
    cmd->add_option("--sample-rate", flags.sample_rate,
                    "receive sample rate in S/s (default from config)");
}

cotdr::ExperimentConfig resolve_config(const CommonFlags& flags) {
    cotdr::ExperimentConfig cfg = cotdr::load_config(flags.config_path);
    if (!flags.frontend.empty())
        cfg.receiver.frontend = cotdr::frontend_from_string(flags.frontend);
    if (flags.traces >= 0) cfg.receiver.n_traces = static_cast<std::size_t>(flags.traces);
    if (flags.sample_rate > 0.0) cfg.receiver.sample_rate_hz = flags.sample_rate;
    return cfg;
}

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

std::string hex64(std::uint64_t v) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = hex_digit(v & 0xf);
    return s;
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const cotdr::ExperimentConfig& cfg, std::uint64_t seed,
                    const json& extra_flags) {
    const json canonical = cotdr::config_to_json(cfg);
    json manifest{{"subcommand", subcommand},
                  {"seed", seed},
                  {"flags", extra_flags},
                  {"config", canonical},
                  {"config_hash", hex64(cotdr::config_hash(canonical))},
                  {"versions",
                   {{"cotdr", kVersion},
                    {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                    {"fftw", std::string(fftw_version)},
                    {"compiler", std::string(__VERSION__)}}},
                  {"timestamp_utc", iso_utc_now()}};
    cotdr::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

cotdr::MeasurementOptions options_of(const cotdr::ExperimentConfig& cfg,
                                     std::uint64_t seed) {
    cotdr::MeasurementOptions opt;
    opt.probe = cfg.probe;
    opt.receiver = cfg.receiver;
    opt.analysis = cfg.analysis;
    opt.seed = seed;
    return opt;
}

int run_skew(const cotdr::ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed,
             cotdr::MeasurementMode mode, double drift_k) {
    cotdr::SkewResult res =
        cotdr::measure_skew(cfg.fiber, cfg.environment, options_of(cfg, seed), mode,
                            drift_k);
    cotdr::write_text_file(out / "report.json",
                           cotdr::skew_report_json(res, cfg.fiber).dump(2) + "\n");
    cotdr::write_text_file(out / "skew.csv", cotdr::skew_csv(res));
    return res.failed_cores.empty() ? 0 : 4;
}

int run_sweep(const cotdr::ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed) {
    cotdr::MeasurementReport rep = cotdr::run_temperature_sweep(
        cfg.fiber, cfg.sweep, cfg.environment, options_of(cfg, seed));
    cotdr::write_text_file(out / "report.json",
                           cotdr::sweep_report_json(rep).dump(2) + "\n");
    cotdr::write_text_file(out / "delays.csv", cotdr::sweep_delays_csv(rep));
    cotdr::write_text_file(out / "skew_vs_temperature.csv", cotdr::sweep_skew_csv(rep));
    cotdr::write_text_file(out / "tdc.csv", cotdr::sweep_tdc_csv(rep));
    return rep.dropped_cores.empty() ? 0 : 4;
}

int run_pmd_cmd(const cotdr::ExperimentConfig& cfg, const fs::path& out) {
    auto results = cotdr::run_pmd(cfg.fiber, cfg.pmd, cfg.environment);
    cotdr::write_text_file(out / "pmd_summary.json",
                           cotdr::pmd_summary_json(results).dump(2) + "\n");
    for (const auto& r : results)
        cotdr::write_text_file(out / ("dgd_" + r.core_id + ".csv"),
                               cotdr::pmd_curve_csv(r.report));
    return 0;
}

int run_trace(const cotdr::ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed,
              std::size_t stride, bool dump_accumulated) {
    // One shot of the first splitter group, keeping the intermediate products.
    const auto groups = cotdr::partition_groups(cfg.fiber);
    cotdr::FiberSpec sub = cfg.fiber;
    sub.cores.clear();
    for (const auto& id : groups.front()) sub.cores.push_back(cfg.fiber.core(id));

    cotdr::MeasurementOptions opt = options_of(cfg, cotdr::mix64(seed, 0));
    cotdr::GroupResult res = cotdr::measure_group(sub, cfg.environment, opt, true);

    cotdr::write_text_file(out / "correlation.csv",
                           cotdr::correlation_csv(res.correlation, stride));
    std::string peaks = "core_id,position_s,amplitude,fwhm_s,rms_residual\n";
    peaks += "reference," + cotdr::format_double(res.reference_peak.position) + "," +
             cotdr::format_double(res.reference_peak.amplitude) + "," +
             cotdr::format_double(res.reference_peak.fwhm()) + "," +
             cotdr::format_double(res.reference_peak.rms_residual) + "\n";
    for (const auto& rec : res.records)
        peaks += rec.core_id + "," + cotdr::format_double(rec.end_peak.position) + "," +
                 cotdr::format_double(rec.end_peak.amplitude) + "," +
                 cotdr::format_double(rec.end_peak.fwhm()) + "," +
                 cotdr::format_double(rec.end_peak.rms_residual) + "\n";
    cotdr::write_text_file(out / "peaks.csv", peaks);

    if (dump_accumulated && cfg.receiver.frontend == cotdr::FrontendKind::slicer1) {
        std::ofstream csv(out / "accumulated.csv");
        cotdr::write_accumulated_csv(csv, res.accumulated);
        std::ofstream bin(out / "accumulated.bin", std::ios::binary);
        cotdr::write_accumulated_binary(bin, res.accumulated);
    }
    return res.failed_cores.empty() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation-OTDR measurement chain for multi-core fibers"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string mode_name = "simultaneous";
    double drift_k = 0.05;
    std::size_t stride = 1;
    bool dump_accumulated = false;
    std::string manifest_path;

    auto* skew = app.add_subcommand("skew", "per-core delays and skew vs. center core");
    add_common(skew, flags);
    skew->add_option("--mode", mode_name, "simultaneous | consecutive")
        ->check(CLI::IsMember({"simultaneous", "consecutive"}));
    skew->add_option("--drift-k", drift_k,
                     "temperature drift per shot in consecutive mode [K]");

    auto* sweep = app.add_subcommand("temp-sweep", "skew and TDC over a temperature sweep");
    add_common(sweep, flags);

    auto* pmd = app.add_subcommand("pmd", "DGD vs. wavelength and PMD per core");
    add_common(pmd, flags);

    auto* trace = app.add_subcommand("trace", "raw correlation dump of one shot");
    add_common(trace, flags);
    trace->add_option("--stride", stride, "write every n-th correlation sample");
    trace->add_flag("--dump-accumulated", dump_accumulated,
                    "also dump the accumulated 1-bit sums (slicer frontend)");

    auto* selftest = app.add_subcommand("selftest", "run built-in oracle checks");

    auto* rerun = app.add_subcommand("rerun", "reproduce a run from its manifest");
    rerun->add_option("--manifest", manifest_path, "manifest.json of a previous run")
        ->required();
    rerun->add_option("--out", flags.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (selftest->parsed()) return cotdr::run_selftest(std::cout) ? 0 : 1;

        cotdr::ExperimentConfig cfg;
        std::string subcommand;
        json extra_flags = json::object();

        if (rerun->parsed()) {
            std::ifstream in(manifest_path);
            if (!in) throw cotdr::ConfigError("cannot open manifest '" + manifest_path + "'");
            json manifest = json::parse(in);
            cfg = cotdr::config_from_json(manifest.at("config"));
            flags.seed = manifest.at("seed").get<std::uint64_t>();
            subcommand = manifest.at("subcommand").get<std::string>();
            extra_flags = manifest.value("flags", json::object());
            if (extra_flags.contains("mode"))
                mode_name = extra_flags["mode"].get<std::string>();
            if (extra_flags.contains("drift_k")) drift_k = extra_flags["drift_k"];
            if (extra_flags.contains("stride"))
                stride = extra_flags["stride"].get<std::size_t>();
            if (extra_flags.contains("dump_accumulated"))
                dump_accumulated = extra_flags["dump_accumulated"].get<bool>();
        } else {
            cfg = resolve_config(flags);
            subcommand = app.get_subcommands().front()->get_name();
            if (skew->parsed()) {
                extra_flags["mode"] = mode_name;
                extra_flags["drift_k"] = drift_k;
            }
            if (trace->parsed()) {
                extra_flags["stride"] = stride;
                extra_flags["dump_accumulated"] = dump_accumulated;
            }
        }

        const fs::path out(flags.out_dir);
        fs::create_directories(out);
        write_manifest(out, subcommand, cfg, flags.seed, extra_flags);

        if (subcommand == "skew")
            return run_skew(cfg, out, flags.seed,
                            mode_name == "consecutive"
                                ? cotdr::MeasurementMode::consecutive
                                : cotdr::MeasurementMode::simultaneous,
                            drift_k);
        if (subcommand == "temp-sweep") return run_sweep(cfg, out, flags.seed);
        if (subcommand == "pmd") return run_pmd_cmd(cfg, out);
        if (subcommand == "trace")
            return run_trace(cfg, out, flags.seed, stride, dump_accumulated);
        throw cotdr::ConfigError("unknown subcommand in manifest: " + subcommand);
    } catch (const cotdr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cotdr::FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 3;
    }
}
