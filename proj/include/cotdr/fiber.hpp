#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cotdr/sequence.hpp"
#include "cotdr/types.hpp"

namespace cotdr {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Parameters of a randomized birefringent-segment model attached to a core
/// (consumed by the pmd module; the fiber channel itself is intensity-only).
struct PmdModelSpec {
    double mean_dgd_s = 0.0;
    int n_segments = 100;
    std::uint64_t seed = 0;
};

struct CoreSpec {
    std::string core_id;
    std::array<double, 2> position_um{0.0, 0.0};  // within the cladding cross-section
    double length_m = 0.0;
    double group_index = 1.468;
    double skew_offset_s = 0.0;   // one-way delay added to the geometric delay
    double tdc_ppm_per_k = 7.49;  // temperature delay coefficient
    double end_reflectance = 1.0; // linear power ratio (0, 1]
    std::optional<PmdModelSpec> birefringence;

    /// One-way geometric delay group_index * length / c at the reference
    /// temperature, without the skew offset.
    double base_delay() const { return group_index * length_m / kSpeedOfLight; }
};

struct FiberSpec {
    std::string name;
    std::vector<CoreSpec> cores;
    std::string center_core_id;
    double reference_reflector_delay_s = 1e-6;  // round-trip to the partial reflector
    double reference_reflectance = 0.04;        // -14 dB default
    double splitter_excess_delay_s = 0.0;       // per branch, one-way
    double backscatter_level = 0.0;             // per-sample power vs. end reflection
    double backscatter_alpha_db_per_km = 0.2;
    double delay_jitter_sigma_s = 0.0;          // per-measurement random one-way delay

    const CoreSpec& core(const std::string& id) const;
    const CoreSpec& center_core() const { return core(center_core_id); }
    /// Throws ConfigError on inconsistent parameters (missing/duplicate cores,
    /// center core not nearest the cladding axis, out-of-range reflectances,
    /// skew offsets beyond the 10 ns/km sanity bound).
    void validate() const;
};

struct EnvironmentState {
    double temperature_c = 20.0;
    double reference_temperature_c = 20.0;  // delays are anchored here
};

/// One-way delay tau_base * (1 + tdc*1e-6 * (T - T_ref)) + skew_offset.
/// Temperatures outside [-40, 85] degC are outside the model's validity range.
double delay_at_temperature(const CoreSpec& core, const EnvironmentState& env);

/// Simulates the optical path: circulator -> partial reference reflector ->
/// 1x4 split -> cores -> end reflections, in optical power units. Adds the
/// Rayleigh backscatter floor (seeded speckle); receiver noise is the
/// frontend's job. Deterministic given rng_seed.
AnalogTrace propagate(const BurstFrame& frame, const AnalogTrace& waveform,
                      const FiberSpec& fiber, const EnvironmentState& env,
                      std::uint64_t rng_seed);

/// Echo round-trip delay of a core as propagate places it:
/// reference_reflector_delay + 2*(splitter_excess_delay + one-way delay).
double echo_round_trip(const FiberSpec& fiber, const CoreSpec& core,
                       const EnvironmentState& env);

/// Hexagonal core layouts used by the bundled configs; positions are labels
/// for reporting, not inputs to the skew model. count must be 7 or 19.
std::vector<std::array<double, 2>> hex_layout(int count, double pitch_um);

}  // namespace cotdr
