#include "cotdr/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cotdr/fft.hpp"
#include "cotdr/rng.hpp"

namespace cotdr {

namespace {

constexpr std::uint64_t kJitterStream = 0x6a69747465720000ULL;
constexpr std::uint64_t kSpeckleStream = 0x737065636b6c6500ULL;

void check_environment(const EnvironmentState& env) {
    if (env.temperature_c < -40.0 || env.temperature_c > 85.0)
        throw SimulationError("temperature outside model validity range [-40, 85] degC");
}

}  // namespace

const CoreSpec& FiberSpec::core(const std::string& id) const {
    for (const auto& c : cores)
        if (c.core_id == id) return c;
    throw ConfigError("fiber '" + name + "' has no core '" + id + "'");
}

void FiberSpec::validate() const {
    if (cores.empty()) throw ConfigError("fiber has no cores");
    for (const auto& c : cores) {
        if (c.core_id.empty()) throw ConfigError("core with empty id");
        if (std::count_if(cores.begin(), cores.end(),
                          [&](const CoreSpec& o) { return o.core_id == c.core_id; }) != 1)
            throw ConfigError("duplicate core id '" + c.core_id + "'");
        if (!(c.length_m > 0.0)) throw ConfigError("core '" + c.core_id + "': length must be > 0");
        if (!(c.group_index > 1.0)) throw ConfigError("core '" + c.core_id + "': group_index must be > 1");
        if (!(c.end_reflectance > 0.0) || c.end_reflectance > 1.0)
            throw ConfigError("core '" + c.core_id + "': end_reflectance must be in (0, 1]");
        // Sanity bound: measured inter-core skews stay below 10 ns/km.
        if (std::abs(c.skew_offset_s) >= 10e-9 * c.length_m / 1000.0)
            throw ConfigError("core '" + c.core_id + "': skew_offset exceeds 10 ns/km bound");
    }
    const CoreSpec& center = core(center_core_id);
    const double rc = std::hypot(center.position_um[0], center.position_um[1]);
    for (const auto& c : cores) {
        if (std::hypot(c.position_um[0], c.position_um[1]) < rc - 1e-9)
            throw ConfigError("center_core_id '" + center_core_id +
                              "' is not the core nearest the cladding axis");
    }
    if (!(reference_reflectance > 0.0) || reference_reflectance > 1.0)
        throw ConfigError("reference_reflectance must be in (0, 1]");
    if (reference_reflector_delay_s < 0.0)
        throw ConfigError("reference_reflector_delay_s must be >= 0");
    if (backscatter_level < 0.0) throw ConfigError("backscatter_level must be >= 0");
    if (delay_jitter_sigma_s < 0.0) throw ConfigError("delay_jitter_sigma_s must be >= 0");
}

double delay_at_temperature(const CoreSpec& core, const EnvironmentState& env) {
    check_environment(env);
    const double tau_base = core.base_delay();
    const double dt = env.temperature_c - env.reference_temperature_c;
    return tau_base * (1.0 + core.tdc_ppm_per_k * 1e-6 * dt) + core.skew_offset_s;
}

double echo_round_trip(const FiberSpec& fiber, const CoreSpec& core,
                       const EnvironmentState& env) {
    return fiber.reference_reflector_delay_s +
           2.0 * (fiber.splitter_excess_delay_s + delay_at_temperature(core, env));
}

AnalogTrace propagate(const BurstFrame& frame, const AnalogTrace& waveform,
                      const FiberSpec& fiber, const EnvironmentState& env,
                      std::uint64_t rng_seed) {
    check_environment(env);
    fiber.validate();
    if (fiber.cores.size() > 4)
        throw SimulationError(
            "the 1x4 splitter feeds at most 4 cores per shot; measure in groups");
    if (!(waveform.sample_rate > 0.0))
        throw std::invalid_argument("waveform sample_rate not set");

    const double fs = waveform.sample_rate;
    const std::size_t n = waveform.samples.size();
    const double frame_duration = frame.frame_duration();
    const double burst_duration = frame.payload_duration();

    // Per-measurement delay jitter (PMD-like variation knob), one draw per core.
    std::vector<double> jitter(fiber.cores.size(), 0.0);
    if (fiber.delay_jitter_sigma_s > 0.0) {
        for (std::size_t k = 0; k < fiber.cores.size(); ++k) {
            auto rng = make_rng({rng_seed, kJitterStream, k});
            std::normal_distribution<double> nd(0.0, fiber.delay_jitter_sigma_s);
            jitter[k] = nd(rng);
        }
    }

    double max_echo = fiber.reference_reflector_delay_s;
    std::vector<double> echo_delay(fiber.cores.size());
    for (std::size_t k = 0; k < fiber.cores.size(); ++k) {
        echo_delay[k] =
            echo_round_trip(fiber, fiber.cores[k], env) + 2.0 * jitter[k];
        max_echo = std::max(max_echo, echo_delay[k]);
    }
    if (max_echo + burst_duration > frame_duration)
        throw SimulationError(
            "frame too short: echoes of consecutive bursts would overlap "
            "(needs frame duration > max round trip + burst duration)");

    // Superpose the reference echo and the core end echoes as fractional-sample
    // delays via a frequency-domain phase ramp. The 1x4 splitter is traversed
    // twice: power scale 1/16 per core.
    const std::size_t nfft = fft::next_pow2(std::max<std::size_t>(n, 2));
    auto spectrum = fft::rfft(waveform.samples, nfft);
    std::vector<std::complex<double>> acc(spectrum.size(), {0.0, 0.0});
    fft::add_delayed_copy(spectrum, acc, nfft, fs, fiber.reference_reflector_delay_s,
                          fiber.reference_reflectance);
    for (std::size_t k = 0; k < fiber.cores.size(); ++k) {
        const double amp = fiber.cores[k].end_reflectance / 16.0;
        fft::add_delayed_copy(spectrum, acc, nfft, fs, echo_delay[k], amp);
    }
    auto full = fft::irfft(acc, nfft);

    AnalogTrace out;
    out.sample_rate = fs;
    out.t0 = waveform.t0;
    out.samples.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));

    // Rayleigh backscatter floor: per-sample speckle intensity with an
    // exp(-2 alpha z) envelope along each core, relative to that core's end
    // echo power at the fiber input.
    if (fiber.backscatter_level > 0.0) {
        for (std::size_t k = 0; k < fiber.cores.size(); ++k) {
            const CoreSpec& core = fiber.cores[k];
            const double start = fiber.reference_reflector_delay_s +
                                 2.0 * fiber.splitter_excess_delay_s;
            const double rt = 2.0 * core.group_index * core.length_m / kSpeedOfLight;
            const auto i0 = static_cast<std::size_t>(
                std::max(0.0, std::ceil((start - out.t0) * fs)));
            const auto i1 = static_cast<std::size_t>(std::min(
                static_cast<double>(n), std::ceil((start + rt - out.t0) * fs)));
            if (i0 >= i1) continue;
            const double p0 = fiber.backscatter_level * core.end_reflectance / 16.0;
            auto rng = make_rng({rng_seed, kSpeckleStream, k});
            std::normal_distribution<double> nd(0.0, 1.0);
            for (std::size_t i = i0; i < i1; ++i) {
                const double t = out.t0 + static_cast<double>(i) / fs;
                const double z_km =
                    (t - start) * kSpeedOfLight / (2.0 * core.group_index) * 1e-3;
                const double envelope =
                    std::pow(10.0, -2.0 * fiber.backscatter_alpha_db_per_km * z_km / 10.0);
                const double u = nd(rng), v = nd(rng);
                out.samples[i] += p0 * envelope * 0.5 * (u * u + v * v);
            }
        }
    }
    return out;
}

std::vector<std::array<double, 2>> hex_layout(int count, double pitch_um) {
    if (count != 7 && count != 19)
        throw std::invalid_argument("hex_layout supports 7 or 19 cores");
    std::vector<std::array<double, 2>> pos;
    pos.push_back({0.0, 0.0});
    for (int ring = 1; ring <= (count == 7 ? 1 : 2); ++ring) {
        // Walk the hexagonal ring: start at (ring, 0) in axial steps.
        double x = ring * pitch_um, y = 0.0;
        const double angles[6] = {2.0943951023931953, 3.141592653589793,
                                  4.1887902047863905, 5.235987755982989,
                                  0.0,                1.0471975511965976};
        for (int side = 0; side < 6; ++side) {
            for (int step = 0; step < ring; ++step) {
                pos.push_back({x, y});
                x += pitch_um * std::cos(angles[side]);
                y += pitch_um * std::sin(angles[side]);
            }
        }
    }
    return pos;
}

}  // namespace cotdr
