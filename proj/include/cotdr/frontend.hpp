#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>

#include "cotdr/types.hpp"

namespace cotdr {

/// Adds i.i.d. zero-mean Gaussian noise, deterministic given the seed.
AnalogTrace add_noise(const AnalogTrace& trace, double sigma, std::uint64_t seed);

/// Uniform mid-rise quantizer with clipping outside [lo, hi].
QuantizedTrace quantize(const AnalogTrace& trace, int bits_per_sample,
                        std::array<double, 2> full_scale);

/// Sums 1-bit slicer decisions (sample > threshold) over n trigger-aligned
/// traces pulled from `source(trace_index)`. All traces must share
/// sample_rate, t0 and length.
AccumulatedTrace accumulate(const std::function<AnalogTrace(std::size_t)>& source,
                            double threshold, std::size_t n_traces);

/// accumulate() over n noisy copies of `clean`, with a fresh noise stream per
/// trace index (trace t uses stream mix(seed, t)).
AccumulatedTrace accumulate_sliced(const AnalogTrace& clean, double sigma,
                                   double threshold, std::size_t n_traces,
                                   std::uint64_t seed);

/// Distributionally exact shortcut for accumulate_sliced: per sample, the sum
/// of n independent slicer decisions is Binomial(n, Phi((s - thr)/sigma)).
/// Same distribution, different draws; meant for large n where the per-trace
/// loop is too slow.
AccumulatedTrace accumulate_binomial(const AnalogTrace& clean, double sigma,
                                     double threshold, std::size_t n_traces,
                                     std::uint64_t seed);

/// Mean of n noisy copies of `clean`. The exact per-trace loop and the
/// shortcut (signal + N(0, sigma/sqrt(n)) per sample) sample the same
/// distribution.
AnalogTrace average_analog(const AnalogTrace& clean, double sigma,
                           std::size_t n_traces, std::uint64_t seed);
AnalogTrace average_analog_exact(const AnalogTrace& clean, double sigma,
                                 std::size_t n_traces, std::uint64_t seed);

/// Scope-style averaging through the multi-bit ADC: each trace is digitized,
/// codes are averaged and mapped back to amplitude (mid-rise reconstruction).
AnalogTrace average_quantized_exact(const AnalogTrace& clean, double sigma,
                                    int bits_per_sample, std::array<double, 2> full_scale,
                                    std::size_t n_traces, std::uint64_t seed);

/// Keeps every `factor`-th sample starting at `offset` (FPGA sampling of the
/// receive waveform at a divided clock).
AnalogTrace decimate(const AnalogTrace& trace, int factor, int offset);

/// Expected slicer hit probability Phi((s - threshold)/sigma).
double slicer_hit_probability(double signal, double threshold, double sigma);

void write_accumulated_csv(std::ostream& os, const AccumulatedTrace& acc);
void write_accumulated_binary(std::ostream& os, const AccumulatedTrace& acc);

}  // namespace cotdr
