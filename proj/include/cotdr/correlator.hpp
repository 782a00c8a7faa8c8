#pragma once

#include "cotdr/sequence.hpp"
#include "cotdr/types.hpp"

namespace cotdr {

/// Bipolar (+-1) ideal-NRZ resample of the payload bits at the receive sample
/// rate, explicitly made zero-mean over the payload extent. The fill pattern
/// is excluded. Valid for sample_rate >= bit_rate.
AnalogTrace reference_kernel(const BurstFrame& frame, double sample_rate);

/// Full linear cross-correlation c[j] = sum_n kernel[n] * trace[n + j],
/// j in [-(M-1), N-1], computed via FFT with zero padding. A perfectly
/// aligned copy of the kernel inside the trace produces a peak equal to the
/// kernel energy, and the output time axis maps that peak to the arrival time
/// of the payload start.
AnalogTrace cross_correlate(const AnalogTrace& trace, const AnalogTrace& kernel);

/// Accumulated 1-bit traces share the analog code path after removing the DC
/// pedestal: samples are mean-shifted and scaled by 1/n_traces.
AnalogTrace cross_correlate(const AccumulatedTrace& trace, const AnalogTrace& kernel);

/// The mean-shift + 1/n_traces conversion used above.
AnalogTrace to_analog(const AccumulatedTrace& acc);

}  // namespace cotdr
