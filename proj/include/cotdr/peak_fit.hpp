#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotdr/types.hpp"

namespace cotdr {

/// A fitted correlation peak. position/sigma_width are in seconds on the
/// trace's time axis; amplitude and rms_residual in correlation units.
struct ReflectionPeak {
    double position = 0.0;
    double amplitude = 0.0;
    double sigma_width = 0.0;
    double rms_residual = 0.0;
    std::size_t window_first = 0;
    std::size_t window_last = 0;

    /// Gaussian full width at half maximum, 2*sqrt(2 ln 2) * sigma.
    double fwhm() const { return 2.3548200450309493 * sigma_width; }
};

/// Thrown when the Gaussian refinement cannot run or converge. When the
/// three-point parabola initialization was possible its estimate is carried
/// along so callers can fall back to it.
struct FitError : std::runtime_error {
    FitError(const std::string& what, std::optional<ReflectionPeak> parabola_estimate)
        : std::runtime_error(what), fallback(std::move(parabola_estimate)) {}
    std::optional<ReflectionPeak> fallback;
};

/// Local maxima above threshold x robust noise floor (1.4826 * MAD), with
/// greedy suppression of maxima closer than min_separation: the larger
/// survives, ties resolve to the earlier index. Returns ascending indices.
std::vector<std::size_t> detect_peaks(const AnalogTrace& corr, double threshold,
                                      double min_separation_s);

/// Least-squares fit of A*exp(-(t-mu)^2/(2 s^2)) + b over
/// [center - half_window, center + half_window], Gauss-Newton with a
/// three-point log-parabola initialization. half_window 0 picks the default
/// apex-focused window from the parabola width estimate. The window must lie
/// inside the trace, span >= 5 samples, and center must be its maximum.
ReflectionPeak fit_gaussian(const AnalogTrace& corr, std::size_t center_index,
                            std::size_t half_window = 0);

/// Convenience: detect_peaks + fit_gaussian per candidate.
std::vector<ReflectionPeak> fit_peaks(const AnalogTrace& corr, double threshold,
                                      double min_separation_s);

}  // namespace cotdr
