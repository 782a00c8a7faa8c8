#include "cotdr/correlator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cotdr/fft.hpp"

namespace cotdr {

AnalogTrace reference_kernel(const BurstFrame& frame, double sample_rate) {
    if (frame.payload.length() == 0) throw std::invalid_argument("empty burst payload");
    if (sample_rate < frame.bit_rate)
        throw std::invalid_argument("kernel sample_rate must be >= bit_rate");
    const auto& bits = frame.payload.bits;
    const double bit_period = 1.0 / frame.bit_rate;
    const auto n = static_cast<std::size_t>(
        std::llround(frame.payload_duration() * sample_rate));

    AnalogTrace kernel;
    kernel.sample_rate = sample_rate;
    kernel.t0 = 0.0;
    kernel.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(
            std::floor(static_cast<double>(i) / sample_rate / bit_period));
        if (k >= bits.size()) k = bits.size() - 1;
        kernel.samples[i] = bits[k] ? 1.0 : -1.0;
    }
    const double mean =
        std::accumulate(kernel.samples.begin(), kernel.samples.end(), 0.0) /
        static_cast<double>(n);
    for (auto& v : kernel.samples) v -= mean;
    return kernel;
}

AnalogTrace cross_correlate(const AnalogTrace& trace, const AnalogTrace& kernel) {
    const std::size_t n = trace.samples.size();
    const std::size_t m = kernel.samples.size();
    if (m == 0 || n == 0) throw std::invalid_argument("empty correlation input");
    if (m > n) throw std::invalid_argument("kernel longer than trace");
    if (trace.sample_rate != kernel.sample_rate)
        throw std::invalid_argument("trace and kernel sample rates differ");

    const std::size_t nout = n + m - 1;
    const std::size_t nfft = fft::next_pow2(nout);
    auto tx = fft::rfft(trace.samples, nfft);
    auto kx = fft::rfft(kernel.samples, nfft);
    for (std::size_t i = 0; i < tx.size(); ++i) tx[i] *= std::conj(kx[i]);
    auto circ = fft::irfft(tx, nfft);

    AnalogTrace out;
    out.sample_rate = trace.sample_rate;
    out.t0 = trace.t0 - static_cast<double>(m - 1) / trace.sample_rate;
    out.samples.resize(nout);
    // Output index i corresponds to lag j = i - (m-1); negative lags wrap to
    // the top of the circular buffer.
    for (std::size_t i = 0; i < nout; ++i) {
        const auto j = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(m - 1);
        const std::size_t src = j >= 0 ? static_cast<std::size_t>(j)
                                       : nfft - static_cast<std::size_t>(-j);
        out.samples[i] = circ[src];
    }
    return out;
}

AnalogTrace to_analog(const AccumulatedTrace& acc) {
    if (acc.n_traces == 0) throw std::invalid_argument("accumulated trace has n_traces == 0");
    AnalogTrace out;
    out.sample_rate = acc.sample_rate;
    out.t0 = acc.t0;
    out.samples.resize(acc.sums.size());
    double mean = 0.0;
    for (auto s : acc.sums) mean += s;
    mean /= static_cast<double>(acc.sums.size());
    const double inv = 1.0 / static_cast<double>(acc.n_traces);
    for (std::size_t i = 0; i < acc.sums.size(); ++i)
        out.samples[i] = (static_cast<double>(acc.sums[i]) - mean) * inv;
    return out;
}

AnalogTrace cross_correlate(const AccumulatedTrace& trace, const AnalogTrace& kernel) {
    return cross_correlate(to_analog(trace), kernel);
}

}  // namespace cotdr
