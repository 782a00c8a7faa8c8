#include "cotdr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cotdr/frontend.hpp"
#include "cotdr/peak_fit.hpp"
#include "cotdr/rng.hpp"
#include "cotdr/sequence.hpp"

namespace cotdr {

namespace {

constexpr std::uint64_t kPropagateStream = 0x70726f70ULL;
constexpr std::uint64_t kFrontendStream = 0x66726f6eULL;

double median_of(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

struct Candidate {
    std::size_t index;
    double time;
};

/// Nearest detected peak to `expected`, within the capture window.
std::optional<Candidate> nearest_peak(const AnalogTrace& corr,
                                      const std::vector<std::size_t>& peaks,
                                      double expected, double window) {
    std::optional<Candidate> best;
    for (std::size_t idx : peaks) {
        const double t = corr.t0 + static_cast<double>(idx) / corr.sample_rate;
        const double d = std::abs(t - expected);
        if (d <= window && (!best || d < std::abs(best->time - expected)))
            best = Candidate{idx, t};
    }
    return best;
}

}  // namespace

namespace {

/// "High" level of a code echo inside [start, start + burst): the 60th
/// percentile, which stays near the single-echo amplitude even when a second
/// core's code overlaps the window.
double echo_level(const AnalogTrace& trace, double start, double burst_duration_s) {
    const auto i0 = static_cast<std::size_t>(
        std::max(0.0, (start - trace.t0) * trace.sample_rate));
    const auto i1 = std::min(
        trace.samples.size(),
        i0 + static_cast<std::size_t>(burst_duration_s * trace.sample_rate));
    if (i0 >= i1) return -1.0;
    std::vector<double> window(trace.samples.begin() + static_cast<std::ptrdiff_t>(i0),
                               trace.samples.begin() + static_cast<std::ptrdiff_t>(i1));
    const std::size_t rank = window.size() * 6 / 10;
    std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(rank),
                     window.end());
    return window[rank];
}

}  // namespace

double auto_slicer_threshold(const AnalogTrace& calibration, const FiberSpec& fiber,
                             const EnvironmentState& env, double burst_duration_s) {
    const double floor_level = median_of(calibration.samples);
    double weakest = echo_level(calibration, fiber.reference_reflector_delay_s,
                                burst_duration_s);
    bool found = weakest >= 0.0;
    for (const auto& core : fiber.cores) {
        const double amp = echo_level(calibration, echo_round_trip(fiber, core, env),
                                      burst_duration_s);
        if (amp < 0.0) continue;
        if (!found || amp < weakest) weakest = amp;
        found = true;
    }
    if (!found) throw SimulationError("no echo inside the calibration trace");
    return 0.5 * (floor_level + weakest);
}

GroupResult measure_group(const FiberSpec& fiber, const EnvironmentState& env,
                          const MeasurementOptions& options, bool keep_traces) {
    const auto& rx_cfg = options.receiver;
    const double fs = rx_cfg.sample_rate_hz;

    BitSequence payload = generate_prbs(options.probe.prbs_order, options.probe.prbs_seed);
    BurstFrame frame =
        build_burst(std::move(payload), options.probe.bit_rate_hz,
                    options.probe.fill_duration_s);
    AnalogTrace waveform = synthesize_waveform(frame, fs, options.probe.rise_time_s);
    AnalogTrace clean = propagate(frame, waveform, fiber, env,
                                  mix64(options.seed, kPropagateStream));

    // Receive chain. The distribution-equivalent shortcuts stand in for the
    // per-trace loops unless exact_frontend asks for the real thing.
    const std::uint64_t noise_seed = mix64(options.seed, kFrontendStream);
    AnalogTrace rx_for_corr;
    AnalogTrace kernel;
    AccumulatedTrace accumulated;
    if (rx_cfg.frontend == FrontendKind::adc7) {
        std::array<double, 2> full_scale;
        if (rx_cfg.full_scale) {
            full_scale = *rx_cfg.full_scale;
        } else {
            const auto [mn, mx] =
                std::minmax_element(clean.samples.begin(), clean.samples.end());
            const double guard = 5.0 * rx_cfg.noise_sigma + 1e-12;
            full_scale = {*mn - guard, *mx + guard};
        }
        if (rx_cfg.exact_frontend) {
            rx_for_corr = average_quantized_exact(clean, rx_cfg.noise_sigma,
                                                  rx_cfg.adc_bits, full_scale,
                                                  rx_cfg.n_traces, noise_seed);
        } else {
            AnalogTrace averaged =
                average_analog(clean, rx_cfg.noise_sigma, rx_cfg.n_traces, noise_seed);
            QuantizedTrace q = quantize(averaged, rx_cfg.adc_bits, full_scale);
            const double step = (full_scale[1] - full_scale[0]) /
                                static_cast<double>(1 << rx_cfg.adc_bits);
            rx_for_corr = averaged;
            for (std::size_t i = 0; i < q.codes.size(); ++i)
                rx_for_corr.samples[i] =
                    full_scale[0] + (static_cast<double>(q.codes[i]) + 0.5) * step;
        }
        kernel = reference_kernel(frame, fs);
    } else {
        // The MPSoC path samples at the transceiver bit rate unless a rate
        // is configured explicitly.
        const double slicer_rate =
            rx_cfg.slicer_sample_rate_hz.value_or(options.probe.bit_rate_hz);
        AnalogTrace slicer_input = clean;
        double rate = fs;
        const double factor_d = fs / slicer_rate;
        const int factor = static_cast<int>(std::llround(factor_d));
        if (factor < 1 || std::abs(factor_d - factor) > 1e-9)
            throw ConfigError("slicer sample rate must divide sample_rate_hz");
        if (factor > 1) {
            slicer_input = decimate(clean, factor, 0);
            rate = slicer_input.sample_rate;
        }
        const double threshold =
            rx_cfg.slicer_threshold
                ? *rx_cfg.slicer_threshold
                : auto_slicer_threshold(slicer_input, fiber, env,
                                        frame.payload_duration());
        AccumulatedTrace acc =
            rx_cfg.exact_frontend
                ? accumulate_sliced(slicer_input, rx_cfg.noise_sigma, threshold,
                                    rx_cfg.n_traces, noise_seed)
                : accumulate_binomial(slicer_input, rx_cfg.noise_sigma, threshold,
                                      rx_cfg.n_traces, noise_seed);
        rx_for_corr = to_analog(acc);
        kernel = reference_kernel(frame, rate);
        if (keep_traces) accumulated = std::move(acc);
    }

    AnalogTrace corr = cross_correlate(rx_for_corr, kernel);
    std::vector<std::size_t> candidates =
        detect_peaks(corr, options.analysis.peak_threshold,
                     options.analysis.min_separation_s);

    GroupResult result;
    result.accumulated = std::move(accumulated);

    const double window = options.analysis.assignment_window_s;
    auto ref_cand = nearest_peak(corr, candidates, fiber.reference_reflector_delay_s,
                                 std::max(window, 2e-9));
    if (!ref_cand)
        throw SimulationError("reference reflection not found in the correlation trace");
    result.reference_peak =
        fit_gaussian(corr, ref_cand->index, options.analysis.fit_half_window);

    // Assign detected peaks to cores by their expected round trips (nominal
    // fiber data as prior); a shared peak between two cores is unresolvable.
    std::map<std::size_t, std::string> taken;
    for (const auto& core : fiber.cores) {
        const double expected = echo_round_trip(fiber, core, env);
        auto cand = nearest_peak(corr, candidates, expected, window);
        if (!cand) {
            result.failed_cores.push_back(core.core_id);
            continue;
        }
        if (auto it = taken.find(cand->index); it != taken.end())
            throw SimulationError("cores '" + it->second + "' and '" + core.core_id +
                                  "' map to the same correlation peak");
        taken[cand->index] = core.core_id;
        try {
            ReflectionPeak end_peak =
                fit_gaussian(corr, cand->index, options.analysis.fit_half_window);
            CoreDelayRecord rec;
            rec.core_id = core.core_id;
            rec.temperature_c = env.temperature_c;
            rec.reference_peak = result.reference_peak;
            rec.end_peak = end_peak;
            rec.one_way_delay_s = extract_delay(result.reference_peak, end_peak,
                                                fiber.splitter_excess_delay_s);
            result.records.push_back(std::move(rec));
        } catch (const FitError&) {
            result.failed_cores.push_back(core.core_id);
        }
    }
    if (keep_traces) result.correlation = std::move(corr);
    return result;
}

std::vector<std::vector<std::string>> partition_groups(const FiberSpec& fiber) {
    fiber.validate();
    std::vector<std::vector<std::string>> groups;
    std::vector<std::string> current{fiber.center_core_id};
    for (const auto& core : fiber.cores) {
        if (core.core_id == fiber.center_core_id) continue;
        current.push_back(core.core_id);
        if (current.size() == 4) {
            groups.push_back(current);
            current = {fiber.center_core_id};
        }
    }
    if (current.size() > 1 || groups.empty()) groups.push_back(current);
    return groups;
}

namespace {

FiberSpec subset_fiber(const FiberSpec& fiber, const std::vector<std::string>& ids) {
    FiberSpec sub = fiber;
    sub.cores.clear();
    for (const auto& id : ids) sub.cores.push_back(fiber.core(id));
    // The subset keeps the full fiber's center when present; otherwise the
    // core nearest the axis anchors validation.
    bool has_center = false;
    for (const auto& c : sub.cores) has_center |= c.core_id == fiber.center_core_id;
    if (!has_center) {
        const CoreSpec* best = &sub.cores.front();
        for (const auto& c : sub.cores) {
            if (std::hypot(c.position_um[0], c.position_um[1]) <
                std::hypot(best->position_um[0], best->position_um[1]))
                best = &c;
        }
        sub.center_core_id = best->core_id;
    }
    return sub;
}

}  // namespace

SkewResult measure_skew(const FiberSpec& fiber, const EnvironmentState& env,
                        const MeasurementOptions& options, MeasurementMode mode,
                        double drift_k_per_measurement) {
    fiber.validate();
    SkewResult out;
    out.temperature_c = env.temperature_c;

    if (mode == MeasurementMode::simultaneous) {
        const auto groups = partition_groups(fiber);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            MeasurementOptions opt = options;
            opt.seed = mix64(options.seed, g);
            GroupResult res = measure_group(subset_fiber(fiber, groups[g]), env, opt);
            bool center_ok = false;
            for (const auto& rec : res.records)
                center_ok |= rec.core_id == fiber.center_core_id;
            if (!center_ok) {
                // No reference within this group; none of its cores can report.
                for (const auto& id : groups[g]) out.failed_cores.push_back(id);
                continue;
            }
            for (const auto& rec : res.records) {
                // The center core repeats in every group; its first record wins.
                if (out.records.count(rec.core_id)) continue;
                out.records[rec.core_id] = rec;
            }
            auto group_skew = compute_skew(res.records, fiber.center_core_id);
            for (const auto& [id, s] : group_skew)
                if (!out.skew_s.count(id)) out.skew_s[id] = s;
            for (const auto& id : res.failed_cores) out.failed_cores.push_back(id);
        }
    } else {
        // Consecutive shots: one core at a time while the cabinet drifts. The
        // analysis still assumes a constant temperature, which is the point.
        std::size_t shot = 0;
        for (const auto& core : fiber.cores) {
            EnvironmentState drifted = env;
            drifted.temperature_c += drift_k_per_measurement * static_cast<double>(shot);
            MeasurementOptions opt = options;
            opt.seed = mix64(options.seed, 0x636f6e73ULL + shot);
            GroupResult res = measure_group(subset_fiber(fiber, {core.core_id}),
                                            drifted, opt);
            ++shot;
            if (res.records.empty()) {
                out.failed_cores.push_back(core.core_id);
                continue;
            }
            CoreDelayRecord rec = res.records.front();
            rec.temperature_c = env.temperature_c;  // believed temperature
            out.records[rec.core_id] = rec;
        }
        if (out.records.count(fiber.center_core_id)) {
            const double center = out.records.at(fiber.center_core_id).one_way_delay_s;
            for (const auto& [id, rec] : out.records)
                out.skew_s[id] = rec.one_way_delay_s - center;
            out.skew_s[fiber.center_core_id] = 0.0;
        }
    }

    for (const auto& [id, rec] : out.records) out.delay_s[id] = rec.one_way_delay_s;
    return out;
}

MeasurementReport run_temperature_sweep(const FiberSpec& fiber, const SweepConfig& sweep,
                                        const EnvironmentState& base_env,
                                        const MeasurementOptions& options) {
    MeasurementReport report;
    report.fiber_name = fiber.name;
    report.center_core_id = fiber.center_core_id;

    std::vector<SkewResult> per_temperature;
    std::size_t step = 0;
    for (double t = sweep.start_c; t <= sweep.stop_c + 1e-9; t += sweep.step_k, ++step) {
        EnvironmentState env = base_env;
        env.temperature_c = t;
        MeasurementOptions opt = options;
        opt.seed = mix64(options.seed, 0x5357454550ULL + step);
        per_temperature.push_back(measure_skew(fiber, env, opt));
        report.temperatures_c.push_back(t);
    }
    if (!per_temperature.front().skew_s.count(fiber.center_core_id))
        throw SimulationError("center core unmeasurable across the sweep");

    // Keep only cores measured at every temperature; the rest are dropped
    // (partial result) and listed for the caller.
    std::map<std::string, bool> complete;
    for (const auto& core : fiber.cores) {
        bool ok = true;
        for (const auto& res : per_temperature) ok &= res.skew_s.count(core.core_id) > 0;
        complete[core.core_id] = ok;
        if (!ok) report.dropped_cores.push_back(core.core_id);
    }

    std::vector<std::map<std::string, double>> skews;
    for (const auto& res : per_temperature) {
        std::map<std::string, double> kept;
        for (const auto& [id, s] : res.skew_s)
            if (complete.at(id)) kept[id] = s;
        for (const auto& [id, d] : res.delay_s)
            if (complete.at(id)) report.delays_s[id].push_back(d);
        for (const auto& [id, s] : kept) report.skews_s[id].push_back(s);
        skews.push_back(std::move(kept));
    }

    for (const auto& [id, delays] : report.delays_s) {
        std::vector<std::pair<double, double>> series;
        for (std::size_t i = 0; i < delays.size(); ++i)
            series.emplace_back(report.temperatures_c[i], delays[i]);
        report.tdc_fit[id] = fit_tdc(series);
    }
    report.skew_vs_temperature_s = skew_vs_temperature(report.temperatures_c, skews);
    for (const auto& [id, column] : report.skew_vs_temperature_s) {
        const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
        report.skew_p2p_s[id] = *mx - *mn;
    }
    return report;
}

std::vector<CorePmdResult> run_pmd(const FiberSpec& fiber, const PmdMeasurementConfig& cfg,
                                   const EnvironmentState& env) {
    std::vector<CorePmdResult> out;
    for (const auto& core : fiber.cores) {
        if (!core.birefringence) continue;
        CorePolarizationModel model =
            make_random_model(core.birefringence->mean_dgd_s,
                              core.birefringence->n_segments, core.birefringence->seed);
        const double base = delay_at_temperature(core, env);
        CorePmdResult r;
        r.core_id = core.core_id;
        r.report = pmd_report(model, cfg.band_m, cfg.n_points, cfg.sops,
                              cfg.mod_freq_hz, base);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cotdr
