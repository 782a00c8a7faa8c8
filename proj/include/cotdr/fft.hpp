#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cotdr/types.hpp"

namespace cotdr::fft {

std::size_t next_pow2(std::size_t n);

/// Real-to-complex FFT, zero-padded to nfft. Returns nfft/2+1 bins.
std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft);

/// Inverse of rfft, normalized by 1/nfft. Returns nfft real samples.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t nfft);

/// Multiply a half-spectrum in place by the linear phase ramp of a (fractional)
/// delay, scaled by `amplitude`. The Nyquist bin is kept real.
void add_delayed_copy(std::span<const std::complex<double>> source,
                      std::span<std::complex<double>> dest, std::size_t nfft,
                      double sample_rate, double delay_seconds, double amplitude);

/// Band-limited fractional shift of a trace (circular in an internal pow2 buffer,
/// which must be sized so that shifted energy stays inside the trace).
AnalogTrace delay_trace(const AnalogTrace& in, double delay_seconds);

}  // namespace cotdr::fft
