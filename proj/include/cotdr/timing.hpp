#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cotdr/peak_fit.hpp"
#include "cotdr/types.hpp"

namespace cotdr {

struct CoreDelayRecord {
    std::string core_id;
    double one_way_delay_s = 0.0;
    double temperature_c = 0.0;
    ReflectionPeak reference_peak;
    ReflectionPeak end_peak;
};

struct TdcFit {
    double slope_ppm_per_k = 0.0;  // (d tau / dT) / tau(T_min) * 1e6
    double intercept_s = 0.0;      // OLS intercept (delay at 0 degC)
    double r_squared = 1.0;
};

/// One-way delay from the fitted reference and end peaks:
/// (end - ref)/2 - splitter_excess_delay. Throws SimulationError when the
/// result is not positive.
double extract_delay(const ReflectionPeak& reference_peak, const ReflectionPeak& end_peak,
                     double splitter_excess_delay_s);

/// Per-core skew relative to the center core; skew[center] == 0 exactly.
/// All records must stem from one simultaneous measurement (same temperature).
std::map<std::string, double> compute_skew(const std::vector<CoreDelayRecord>& records,
                                           const std::string& center_core_id);

/// Ordinary least squares of delay vs. temperature over >= 3 distinct
/// temperatures; the slope is normalized by the fitted delay at the lowest
/// temperature and reported in ppm/K.
TdcFit fit_tdc(const std::vector<std::pair<double, double>>& temperature_delay_series);

/// Complete result of one measurement campaign: per-core delays and skews at
/// each temperature, TDC fits and the skew table normalized to the lowest
/// temperature.
struct MeasurementReport {
    std::string fiber_name;
    std::string center_core_id;
    std::vector<double> temperatures_c;
    // delays_s[core][ti] pairs with temperatures_c[ti].
    std::map<std::string, std::vector<double>> delays_s;
    std::map<std::string, std::vector<double>> skews_s;
    std::map<std::string, TdcFit> tdc_fit;
    // skew(T) - skew(T_min) per core, plus its peak-to-peak statistic.
    std::map<std::string, std::vector<double>> skew_vs_temperature_s;
    std::map<std::string, double> skew_p2p_s;
    // Cores that could not be fitted at every temperature (partial result).
    std::vector<std::string> dropped_cores;
};

/// skew(T) - skew(T_min) per core across a sweep of per-temperature skew
/// maps; all maps must cover the same core set and temperatures must be
/// strictly increasing.
std::map<std::string, std::vector<double>> skew_vs_temperature(
    const std::vector<double>& temperatures_c,
    const std::vector<std::map<std::string, double>>& skews_per_temperature);

}  // namespace cotdr
