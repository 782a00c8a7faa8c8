#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cotdr/config.hpp"
#include "cotdr/correlator.hpp"
#include "cotdr/timing.hpp"

namespace cotdr {

/// How a multi-core fiber is walked: all four splitter branches at once
/// (groups around the center core) or one core at a time with inter-measurement
/// temperature drift, as happens when measurements are consecutive.
enum class MeasurementMode { simultaneous, consecutive };

struct MeasurementOptions {
    ProbeConfig probe;
    ReceiverConfig receiver;
    AnalysisConfig analysis;
    std::uint64_t seed = 0;
};

struct GroupResult {
    std::vector<CoreDelayRecord> records;
    std::vector<std::string> failed_cores;  // Gaussian refinement did not converge
    ReflectionPeak reference_peak;
    AnalogTrace correlation;        // only filled when keep_traces was requested
    AccumulatedTrace accumulated;   // likewise, slicer frontend only
};

/// One simultaneous C-OTDR shot of the given fiber (all its cores share the
/// splitter): probe burst -> channel -> frontend -> correlation -> peak fits
/// -> per-core delays.
GroupResult measure_group(const FiberSpec& fiber, const EnvironmentState& env,
                          const MeasurementOptions& options,
                          bool keep_traces = false);

/// Groups of at most 4 cores around the center core, in core order, each
/// matching one plug of the 1x4 splitter.
std::vector<std::vector<std::string>> partition_groups(const FiberSpec& fiber);

struct SkewResult {
    double temperature_c = 0.0;
    std::map<std::string, double> delay_s;
    std::map<std::string, double> skew_s;
    std::map<std::string, CoreDelayRecord> records;
    std::vector<std::string> failed_cores;
};

/// Per-core delays and skew vs. the center core at one cabinet temperature.
/// In consecutive mode each core is measured on its own while the cabinet
/// drifts by drift_k_per_measurement between shots.
SkewResult measure_skew(const FiberSpec& fiber, const EnvironmentState& env,
                        const MeasurementOptions& options,
                        MeasurementMode mode = MeasurementMode::simultaneous,
                        double drift_k_per_measurement = 0.0);

/// Temperature sweep start..stop in step_k steps (instant settling), skew
/// measured simultaneously at every point; fills delays, skews, per-core TDC
/// fits and the skew table normalized to the lowest temperature.
MeasurementReport run_temperature_sweep(const FiberSpec& fiber, const SweepConfig& sweep,
                                        const EnvironmentState& base_env,
                                        const MeasurementOptions& options);

/// Per-core PMD characterization over the configured band; cores without a
/// birefringence model are skipped.
struct CorePmdResult {
    std::string core_id;
    PmdReport report;
};
std::vector<CorePmdResult> run_pmd(const FiberSpec& fiber, const PmdMeasurementConfig& cfg,
                                   const EnvironmentState& env);

/// Slicer threshold per the auto rule: midpoint between the trace floor
/// (median) and the weakest expected end-reflection amplitude, estimated from
/// a noise-free calibration trace.
double auto_slicer_threshold(const AnalogTrace& calibration, const FiberSpec& fiber,
                             const EnvironmentState& env, double burst_duration_s);

}  // namespace cotdr
