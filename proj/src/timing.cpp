#include "cotdr/timing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cotdr {

double extract_delay(const ReflectionPeak& reference_peak, const ReflectionPeak& end_peak,
                     double splitter_excess_delay_s) {
    if (end_peak.position <= reference_peak.position)
        throw SimulationError("end reflection does not arrive after the reference");
    const double one_way =
        (end_peak.position - reference_peak.position) / 2.0 - splitter_excess_delay_s;
    if (!(one_way > 0.0))
        throw SimulationError("extracted one-way delay is not positive");
    return one_way;
}

std::map<std::string, double> compute_skew(const std::vector<CoreDelayRecord>& records,
                                           const std::string& center_core_id) {
    if (records.empty()) throw std::invalid_argument("no delay records");
    const CoreDelayRecord* center = nullptr;
    for (const auto& r : records)
        if (r.core_id == center_core_id) center = &r;
    if (center == nullptr)
        throw std::invalid_argument("center core '" + center_core_id +
                                    "' missing from records");
    for (const auto& r : records)
        if (r.temperature_c != center->temperature_c)
            throw std::invalid_argument("skew requires a simultaneous measurement "
                                        "(records at one temperature)");
    std::map<std::string, double> skew;
    for (const auto& r : records)
        skew[r.core_id] = r.one_way_delay_s - center->one_way_delay_s;
    skew[center_core_id] = 0.0;
    return skew;
}

TdcFit fit_tdc(const std::vector<std::pair<double, double>>& series) {
    std::set<double> distinct;
    for (const auto& [t, tau] : series) {
        (void)tau;
        distinct.insert(t);
    }
    if (distinct.size() < 3)
        throw std::invalid_argument("tdc fit needs at least 3 distinct temperatures");

    const auto n = static_cast<double>(series.size());
    double st = 0.0, stau = 0.0;
    for (const auto& [t, tau] : series) {
        st += t;
        stau += tau;
    }
    const double tbar = st / n, taubar = stau / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [t, tau] : series) {
        sxx += (t - tbar) * (t - tbar);
        sxy += (t - tbar) * (tau - taubar);
        syy += (tau - taubar) * (tau - taubar);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("zero temperature spread");

    const double slope = sxy / sxx;
    const double intercept = taubar - slope * tbar;

    double ssr = 0.0;
    for (const auto& [t, tau] : series) {
        const double r = tau - (intercept + slope * t);
        ssr += r * r;
    }
    TdcFit fit;
    fit.intercept_s = intercept;
    // Constant series: slope 0 and a perfect fit.
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;

    const double t_min = *distinct.begin();
    const double tau_at_tmin = intercept + slope * t_min;
    if (!(tau_at_tmin > 0.0))
        throw std::invalid_argument("fitted delay at T_min is not positive");
    fit.slope_ppm_per_k = slope / tau_at_tmin * 1e6;
    return fit;
}

std::map<std::string, std::vector<double>> skew_vs_temperature(
    const std::vector<double>& temperatures_c,
    const std::vector<std::map<std::string, double>>& skews_per_temperature) {
    if (temperatures_c.size() != skews_per_temperature.size())
        throw std::invalid_argument("temperature/skew table size mismatch");
    if (temperatures_c.empty()) throw std::invalid_argument("empty sweep");
    for (std::size_t i = 1; i < temperatures_c.size(); ++i)
        if (!(temperatures_c[i] > temperatures_c[i - 1]))
            throw std::invalid_argument("temperatures must be strictly increasing");
    const auto& first = skews_per_temperature.front();
    for (const auto& m : skews_per_temperature) {
        if (m.size() != first.size())
            throw std::invalid_argument("inconsistent core sets across the sweep");
        for (const auto& [id, v] : m) {
            (void)v;
            if (first.find(id) == first.end())
                throw std::invalid_argument("inconsistent core sets across the sweep");
        }
    }
    std::map<std::string, std::vector<double>> out;
    for (const auto& [id, skew_at_tmin] : first) {
        auto& column = out[id];
        column.reserve(temperatures_c.size());
        for (const auto& m : skews_per_temperature)
            column.push_back(m.at(id) - skew_at_tmin);
    }
    return out;
}

}  // namespace cotdr
