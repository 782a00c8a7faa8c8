#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cotdr/fiber.hpp"
#include "cotdr/pmd.hpp"
#include "cotdr/types.hpp"

namespace cotdr {

enum class FrontendKind { adc7, slicer1 };

std::string to_string(FrontendKind kind);
FrontendKind frontend_from_string(const std::string& name);

struct ProbeConfig {
    int prbs_order = 15;
    std::uint64_t prbs_seed = 1;
    double bit_rate_hz = 10e9;
    double fill_duration_s = 60e-6;
    double rise_time_s = 30e-12;
};

struct ReceiverConfig {
    double sample_rate_hz = 50e9;
    double noise_sigma = 6.25e-3;  // per-trace, in trace power units
    FrontendKind frontend = FrontendKind::adc7;
    std::size_t n_traces = 1000;
    int adc_bits = 7;
    std::optional<std::array<double, 2>> full_scale;     // auto when absent
    std::optional<double> slicer_threshold;              // auto when absent
    std::optional<double> slicer_sample_rate_hz;         // probe bit rate when absent
    bool exact_frontend = false;  // per-trace loops instead of the
                                  // distribution-equivalent shortcuts
};

struct SweepConfig {
    double start_c = 10.0;
    double stop_c = 50.0;
    double step_k = 10.0;
};

struct PmdMeasurementConfig {
    std::array<double, 2> band_m{1.495e-6, 1.605e-6};
    int n_points = 64;
    double mod_freq_hz = 200e6;
    std::array<StokesVector, 4> sops = default_sops();
};

struct AnalysisConfig {
    double peak_threshold = 8.0;        // multiple of the robust noise floor
    double min_separation_s = 1e-9;
    std::size_t fit_half_window = 0;    // samples; 0 selects the apex default
    double assignment_window_s = 1e-9;  // capture range around expected echoes
};

struct ExperimentConfig {
    FiberSpec fiber;
    ProbeConfig probe;
    ReceiverConfig receiver;
    EnvironmentState environment;
    SweepConfig sweep;
    PmdMeasurementConfig pmd;
    AnalysisConfig analysis;
};

/// Parses and validates a config file. Parse errors carry file:line; semantic
/// errors carry the JSON path of the offending field.
ExperimentConfig load_config(const std::filesystem::path& path);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// FNV-1a over the canonical dump; identifies a config in run manifests.
std::uint64_t config_hash(const nlohmann::json& canonical);

}  // namespace cotdr
