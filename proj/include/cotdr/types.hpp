#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cotdr {

/// Uniformly sampled real-valued waveform. Sample i sits at time t0 + i/sample_rate,
/// with t0 measured relative to the burst trigger. For receive traces the samples are
/// in optical-power units (direct detection).
struct AnalogTrace {
    std::vector<double> samples;
    double sample_rate = 0.0;  // samples/s
    double t0 = 0.0;           // seconds

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// ADC output codes, bits_per_sample wide.
struct QuantizedTrace {
    std::vector<std::int32_t> codes;
    int bits_per_sample = 0;
    double sample_rate = 0.0;
    double t0 = 0.0;
};

/// Per-slot sums of 1-bit slicer decisions over n_traces trigger-aligned bursts.
struct AccumulatedTrace {
    std::vector<std::uint32_t> sums;
    std::uint32_t n_traces = 0;
    double sample_rate = 0.0;
    double t0 = 0.0;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cotdr
