#pragma once

#include <cstdint>
#include <vector>

#include "cotdr/types.hpp"

namespace cotdr {

/// Probe bit sequence. For PRBS of order n this holds one full period of
/// 2^n - 1 bits.
struct BitSequence {
    std::vector<bool> bits;

    std::size_t length() const { return bits.size(); }
};

/// One transmitted frame: payload bits followed by fill_length zero symbols.
/// The trigger marks the first payload bit (sample/time origin of every trace).
struct BurstFrame {
    BitSequence payload;
    std::size_t fill_length = 0;
    double bit_rate = 0.0;  // symbols/s
    std::size_t trigger_index = 0;

    double payload_duration() const {
        return static_cast<double>(payload.length()) / bit_rate;
    }
    double frame_duration() const {
        return static_cast<double>(payload.length() + fill_length) / bit_rate;
    }
};

/// Maximal-length LFSR sequence (Fibonacci form, published tap sets),
/// order in [5, 31], 0 < seed < 2^order. Returns one full period.
BitSequence generate_prbs(int order, std::uint64_t seed);

/// Feedback taps used by generate_prbs for a given order (highest tap == order).
const std::vector<int>& prbs_taps(int order);

BurstFrame build_burst(BitSequence payload, double bit_rate, double fill_duration);

/// NRZ waveform of the whole frame (payload + fill) on a uniform sample grid,
/// values in [0, 1]. Edges follow a Gaussian step response with the given
/// 10-90% rise time; rise_time 0 gives ideal rectangular NRZ.
/// Requires sample_rate >= 2 * bit_rate and rise_time < bit period.
AnalogTrace synthesize_waveform(const BurstFrame& frame, double sample_rate,
                                double rise_time);

}  // namespace cotdr
