#include "cotdr/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "cotdr/rng.hpp"

namespace cotdr {

AnalogTrace add_noise(const AnalogTrace& trace, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
    AnalogTrace out = trace;
    if (sigma == 0.0) return out;
    auto rng = make_rng({seed});
    std::normal_distribution<double> nd(0.0, sigma);
    for (auto& v : out.samples) v += nd(rng);
    return out;
}

QuantizedTrace quantize(const AnalogTrace& trace, int bits_per_sample,
                        std::array<double, 2> full_scale) {
    if (bits_per_sample < 1) throw std::invalid_argument("bits_per_sample must be >= 1");
    const double lo = full_scale[0], hi = full_scale[1];
    if (!(lo < hi)) throw std::invalid_argument("full_scale: lo must be < hi");
    const std::int32_t levels = 1 << bits_per_sample;
    const double step = (hi - lo) / static_cast<double>(levels);
    QuantizedTrace out;
    out.bits_per_sample = bits_per_sample;
    out.sample_rate = trace.sample_rate;
    out.t0 = trace.t0;
    out.codes.resize(trace.samples.size());
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        auto code = static_cast<std::int32_t>(std::floor((trace.samples[i] - lo) / step));
        out.codes[i] = std::clamp(code, 0, levels - 1);
    }
    return out;
}

AccumulatedTrace accumulate(const std::function<AnalogTrace(std::size_t)>& source,
                            double threshold, std::size_t n_traces) {
    if (n_traces == 0) throw std::invalid_argument("n_traces must be >= 1");
    AccumulatedTrace acc;
    for (std::size_t t = 0; t < n_traces; ++t) {
        AnalogTrace trace = source(t);
        if (t == 0) {
            acc.sample_rate = trace.sample_rate;
            acc.t0 = trace.t0;
            acc.sums.assign(trace.samples.size(), 0);
        } else if (trace.sample_rate != acc.sample_rate || trace.t0 != acc.t0 ||
                   trace.samples.size() != acc.sums.size()) {
            throw SimulationError("accumulate: traces are not trigger-aligned");
        }
        for (std::size_t i = 0; i < trace.samples.size(); ++i)
            if (trace.samples[i] > threshold) ++acc.sums[i];
    }
    acc.n_traces = static_cast<std::uint32_t>(n_traces);
    return acc;
}

AccumulatedTrace accumulate_sliced(const AnalogTrace& clean, double sigma,
                                   double threshold, std::size_t n_traces,
                                   std::uint64_t seed) {
    return accumulate(
        [&](std::size_t t) { return add_noise(clean, sigma, mix64(seed, t)); },
        threshold, n_traces);
}

double slicer_hit_probability(double signal, double threshold, double sigma) {
    if (sigma == 0.0) return signal > threshold ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(signal - threshold) / (sigma * std::sqrt(2.0)));
}

AccumulatedTrace accumulate_binomial(const AnalogTrace& clean, double sigma,
                                     double threshold, std::size_t n_traces,
                                     std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
    if (n_traces == 0) throw std::invalid_argument("n_traces must be >= 1");
    AccumulatedTrace acc;
    acc.sample_rate = clean.sample_rate;
    acc.t0 = clean.t0;
    acc.n_traces = static_cast<std::uint32_t>(n_traces);
    acc.sums.resize(clean.samples.size());
    auto rng = make_rng({seed});
    const auto n = static_cast<int>(n_traces);
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
        const double p = slicer_hit_probability(clean.samples[i], threshold, sigma);
        if (p <= 0.0) {
            acc.sums[i] = 0;
        } else if (p >= 1.0) {
            acc.sums[i] = acc.n_traces;
        } else {
            std::binomial_distribution<int> bd(n, p);
            acc.sums[i] = static_cast<std::uint32_t>(bd(rng));
        }
    }
    return acc;
}

AnalogTrace average_analog(const AnalogTrace& clean, double sigma,
                           std::size_t n_traces, std::uint64_t seed) {
    if (n_traces == 0) throw std::invalid_argument("n_traces must be >= 1");
    return add_noise(clean, sigma / std::sqrt(static_cast<double>(n_traces)), seed);
}

AnalogTrace average_analog_exact(const AnalogTrace& clean, double sigma,
                                 std::size_t n_traces, std::uint64_t seed) {
    if (n_traces == 0) throw std::invalid_argument("n_traces must be >= 1");
    AnalogTrace acc = clean;
    std::fill(acc.samples.begin(), acc.samples.end(), 0.0);
    for (std::size_t t = 0; t < n_traces; ++t) {
        AnalogTrace noisy = add_noise(clean, sigma, mix64(seed, t));
        for (std::size_t i = 0; i < acc.samples.size(); ++i)
            acc.samples[i] += noisy.samples[i];
    }
    const double inv = 1.0 / static_cast<double>(n_traces);
    for (auto& v : acc.samples) v *= inv;
    return acc;
}

AnalogTrace average_quantized_exact(const AnalogTrace& clean, double sigma,
                                    int bits_per_sample, std::array<double, 2> full_scale,
                                    std::size_t n_traces, std::uint64_t seed) {
    if (n_traces == 0) throw std::invalid_argument("n_traces must be >= 1");
    const double lo = full_scale[0];
    const double step = (full_scale[1] - lo) / static_cast<double>(1 << bits_per_sample);
    std::vector<double> acc(clean.samples.size(), 0.0);
    for (std::size_t t = 0; t < n_traces; ++t) {
        QuantizedTrace q = quantize(add_noise(clean, sigma, mix64(seed, t)),
                                    bits_per_sample, full_scale);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += q.codes[i];
    }
    AnalogTrace out = clean;
    const double inv = 1.0 / static_cast<double>(n_traces);
    for (std::size_t i = 0; i < acc.size(); ++i)
        out.samples[i] = lo + (acc[i] * inv + 0.5) * step;
    return out;
}

AnalogTrace decimate(const AnalogTrace& trace, int factor, int offset) {
    if (factor < 1) throw std::invalid_argument("decimation factor must be >= 1");
    if (offset < 0 || offset >= factor)
        throw std::invalid_argument("decimation offset must be in [0, factor)");
    AnalogTrace out;
    out.sample_rate = trace.sample_rate / factor;
    out.t0 = trace.t0 + offset / trace.sample_rate;
    out.samples.reserve(trace.samples.size() / factor + 1);
    for (std::size_t i = offset; i < trace.samples.size(); i += factor)
        out.samples.push_back(trace.samples[i]);
    return out;
}

void write_accumulated_csv(std::ostream& os, const AccumulatedTrace& acc) {
    os << "sample_index,sum\n";
    for (std::size_t i = 0; i < acc.sums.size(); ++i)
        os << i << ',' << acc.sums[i] << '\n';
}

void write_accumulated_binary(std::ostream& os, const AccumulatedTrace& acc) {
    const std::uint64_t n = acc.sums.size();
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    os.write(reinterpret_cast<const char*>(&acc.n_traces), sizeof(acc.n_traces));
    os.write(reinterpret_cast<const char*>(acc.sums.data()),
             static_cast<std::streamsize>(acc.sums.size() * sizeof(std::uint32_t)));
}

}  // namespace cotdr
