#include "cotdr/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cotdr {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimulationError("cannot write '" + path.string() + "'");
    out << content;
}

nlohmann::json skew_report_json(const SkewResult& result, const FiberSpec& fiber) {
    nlohmann::json cores = nlohmann::json::array();
    for (const auto& core : fiber.cores) {
        auto it = result.records.find(core.core_id);
        if (it == result.records.end()) continue;
        const CoreDelayRecord& rec = it->second;
        cores.push_back({{"core_id", rec.core_id},
                         {"one_way_delay_s", rec.one_way_delay_s},
                         {"skew_s", result.skew_s.at(rec.core_id)},
                         {"reference_position_s", rec.reference_peak.position},
                         {"end_position_s", rec.end_peak.position},
                         {"peak_fwhm_s", rec.end_peak.fwhm()},
                         {"peak_amplitude", rec.end_peak.amplitude},
                         {"fit_rms_residual", rec.end_peak.rms_residual}});
    }
    return nlohmann::json{{"fiber", fiber.name},
                          {"center_core_id", fiber.center_core_id},
                          {"temperature_c", result.temperature_c},
                          {"cores", cores},
                          {"failed_cores", result.failed_cores}};
}

std::string skew_csv(const SkewResult& result) {
    std::ostringstream os;
    os << "core_id,one_way_delay_s,skew_s\n";
    for (const auto& [id, delay] : result.delay_s)
        os << id << ',' << format_double(delay) << ','
           << format_double(result.skew_s.at(id)) << '\n';
    return os.str();
}

nlohmann::json sweep_report_json(const MeasurementReport& report) {
    nlohmann::json cores = nlohmann::json::object();
    for (const auto& [id, delays] : report.delays_s) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < delays.size(); ++i) {
            rows.push_back({{"temperature_c", report.temperatures_c[i]},
                            {"one_way_delay_s", delays[i]},
                            {"skew_s", report.skews_s.at(id)[i]},
                            {"skew_normalized_s", report.skew_vs_temperature_s.at(id)[i]}});
        }
        const TdcFit& fit = report.tdc_fit.at(id);
        cores[id] = {{"points", rows},
                     {"tdc",
                      {{"slope_ppm_per_k", fit.slope_ppm_per_k},
                       {"intercept_s", fit.intercept_s},
                       {"r_squared", fit.r_squared}}},
                     {"skew_p2p_s", report.skew_p2p_s.at(id)}};
    }
    return nlohmann::json{{"fiber", report.fiber_name},
                          {"center_core_id", report.center_core_id},
                          {"temperatures_c", report.temperatures_c},
                          {"cores", cores},
                          {"dropped_cores", report.dropped_cores}};
}

std::string sweep_delays_csv(const MeasurementReport& report) {
    std::ostringstream os;
    os << "core_id,temperature_c,one_way_delay_s\n";
    for (const auto& [id, delays] : report.delays_s)
        for (std::size_t i = 0; i < delays.size(); ++i)
            os << id << ',' << format_double(report.temperatures_c[i]) << ','
               << format_double(delays[i]) << '\n';
    return os.str();
}

std::string sweep_skew_csv(const MeasurementReport& report) {
    std::ostringstream os;
    os << "core_id,temperature_c,skew_s,skew_normalized_s\n";
    for (const auto& [id, column] : report.skew_vs_temperature_s)
        for (std::size_t i = 0; i < column.size(); ++i)
            os << id << ',' << format_double(report.temperatures_c[i]) << ','
               << format_double(report.skews_s.at(id)[i]) << ','
               << format_double(column[i]) << '\n';
    return os.str();
}

std::string sweep_tdc_csv(const MeasurementReport& report) {
    std::ostringstream os;
    os << "core_id,tdc_slope_ppm_per_k,intercept_s,r_squared\n";
    for (const auto& [id, fit] : report.tdc_fit)
        os << id << ',' << format_double(fit.slope_ppm_per_k) << ','
           << format_double(fit.intercept_s) << ',' << format_double(fit.r_squared)
           << '\n';
    return os.str();
}

nlohmann::json pmd_summary_json(const std::vector<CorePmdResult>& results) {
    nlohmann::json cores = nlohmann::json::array();
    for (const auto& r : results) {
        cores.push_back({{"core_id", r.core_id},
                         {"pmd_mps_s", r.report.pmd_mps_s},
                         {"pmd_fit_s", r.report.pmd_fit_s},
                         {"pmd_jme_s", r.report.pmd_jme_s},
                         {"n_points", r.report.wavelengths_m.size()}});
    }
    return nlohmann::json{{"cores", cores}};
}

std::string pmd_curve_csv(const PmdReport& report) {
    std::ostringstream os;
    os << "wavelength_m,dgd_mps_s,dgd_fit_s,dgd_jme_s\n";
    for (std::size_t i = 0; i < report.wavelengths_m.size(); ++i)
        os << format_double(report.wavelengths_m[i]) << ','
           << format_double(report.dgd_mps_s[i]) << ','
           << format_double(report.dgd_fit_s[i]) << ','
           << format_double(report.dgd_jme_s[i]) << '\n';
    return os.str();
}

std::string correlation_csv(const AnalogTrace& corr, std::size_t stride) {
    if (stride == 0) stride = 1;
    std::ostringstream os;
    os << "time_s,value\n";
    for (std::size_t i = 0; i < corr.samples.size(); i += stride)
        os << format_double(corr.t0 + static_cast<double>(i) / corr.sample_rate) << ','
           << format_double(corr.samples[i]) << '\n';
    return os.str();
}

}  // namespace cotdr
