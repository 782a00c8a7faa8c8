#include "cotdr/sequence.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace cotdr {

namespace {

// Standard maximal-length polynomial tap sets (x^n + x^k + ... + 1), one per
// order. Orders 7/15/23/31 coincide with the ITU-T PRBS polynomials.
const std::map<int, std::vector<int>> kTaps = {
    {5, {5, 3}},          {6, {6, 5}},          {7, {7, 6}},
    {8, {8, 6, 5, 4}},    {9, {9, 5}},          {10, {10, 7}},
    {11, {11, 9}},        {12, {12, 11, 10, 4}},{13, {13, 12, 11, 8}},
    {14, {14, 13, 12, 2}},{15, {15, 14}},       {16, {16, 15, 13, 4}},
    {17, {17, 14}},       {18, {18, 11}},       {19, {19, 18, 17, 14}},
    {20, {20, 17}},       {21, {21, 19}},       {22, {22, 21}},
    {23, {23, 18}},       {24, {24, 23, 22, 17}},{25, {25, 22}},
    {26, {26, 25, 24, 20}},{27, {27, 26, 25, 22}},{28, {28, 25}},
    {29, {29, 27}},       {30, {30, 29, 28, 7}},{31, {31, 28}},
};

// 10-90% rise time of a Gaussian step response, in units of its sigma:
// 2 * Phi^-1(0.9).
constexpr double kRise1090PerSigma = 2.5631031310892007;

inline double gauss_step(double t, double sigma) {
    return 0.5 * std::erfc(-t / (sigma * std::sqrt(2.0)));
}

}  // namespace

const std::vector<int>& prbs_taps(int order) {
    auto it = kTaps.find(order);
    if (it == kTaps.end())
        throw std::invalid_argument("prbs order must be in [5, 31], got " +
                                    std::to_string(order));
    return it->second;
}

BitSequence generate_prbs(int order, std::uint64_t seed) {
    const auto& taps = prbs_taps(order);
    const std::uint64_t mask = (1ULL << order) - 1;
    if (seed == 0) throw std::invalid_argument("prbs seed must be non-zero");
    if (seed > mask)
        throw std::invalid_argument("prbs seed must be below 2^order");

    const std::size_t period = (1ULL << order) - 1;
    BitSequence seq;
    seq.bits.resize(period);
    std::uint64_t state = seed;
    for (std::size_t i = 0; i < period; ++i) {
        std::uint64_t fb = 0;
        for (int t : taps) fb ^= (state >> (t - 1));
        fb &= 1ULL;
        state = ((state << 1) | fb) & mask;
        seq.bits[i] = fb != 0;
    }
    return seq;
}

BurstFrame build_burst(BitSequence payload, double bit_rate, double fill_duration) {
    if (payload.length() == 0) throw std::invalid_argument("empty burst payload");
    if (!(bit_rate > 0.0)) throw std::invalid_argument("bit_rate must be positive");
    if (fill_duration < 0.0) throw std::invalid_argument("fill_duration must be >= 0");
    BurstFrame frame;
    frame.payload = std::move(payload);
    frame.bit_rate = bit_rate;
    frame.fill_length = static_cast<std::size_t>(std::llround(fill_duration * bit_rate));
    frame.trigger_index = 0;
    return frame;
}

AnalogTrace synthesize_waveform(const BurstFrame& frame, double sample_rate,
                                double rise_time) {
    if (frame.payload.length() == 0) throw std::invalid_argument("empty burst payload");
    if (sample_rate < 2.0 * frame.bit_rate)
        throw std::invalid_argument("sample_rate must be at least 2x bit_rate");
    const double bit_period = 1.0 / frame.bit_rate;
    if (rise_time < 0.0 || rise_time >= bit_period)
        throw std::invalid_argument("rise_time must be in [0, bit period)");

    const auto& bits = frame.payload.bits;
    const auto nbits = static_cast<std::ptrdiff_t>(bits.size());
    const std::size_t n_samples =
        static_cast<std::size_t>(std::llround(frame.frame_duration() * sample_rate));

    AnalogTrace trace;
    trace.sample_rate = sample_rate;
    trace.t0 = 0.0;
    trace.samples.resize(n_samples, 0.0);

    auto bit_at = [&](std::ptrdiff_t k) -> double {
        return (k >= 0 && k < nbits && bits[static_cast<std::size_t>(k)]) ? 1.0 : 0.0;
    };

    if (rise_time == 0.0) {
        for (std::size_t i = 0; i < n_samples; ++i) {
            double t = static_cast<double>(i) / sample_rate;
            trace.samples[i] = bit_at(static_cast<std::ptrdiff_t>(std::floor(t / bit_period)));
        }
        return trace;
    }

    // Sum of erf steps at the bit edges. Beyond `reach` an edge is fully
    // settled, so each sample only needs the handful of edges nearby.
    const double sigma = rise_time / kRise1090PerSigma;
    const double reach = 6.0 * sigma;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const auto j0 = static_cast<std::ptrdiff_t>(std::floor((t - reach) / bit_period));
        const auto j1 = static_cast<std::ptrdiff_t>(std::floor((t + reach) / bit_period));
        double v = bit_at(j0);
        for (std::ptrdiff_t j = j0 + 1; j <= j1; ++j) {
            const double delta = bit_at(j) - bit_at(j - 1);
            if (delta != 0.0)
                v += delta * gauss_step(t - static_cast<double>(j) * bit_period, sigma);
        }
        trace.samples[i] = v;
    }
    return trace;
}

}  // namespace cotdr
