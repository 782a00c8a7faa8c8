#include "cotdr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cotdr {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double number_field(const json& j, const char* key, const std::string& path) {
    return as_number(require(j, key, path), path + "." + key);
}

double number_or(const json& j, const char* key, const std::string& path, double dflt) {
    if (!j.is_object() || j.find(key) == j.end()) return dflt;
    return as_number(j.at(key), path + "." + key);
}

std::string string_field(const json& j, const char* key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::array<double, 2> pair_field(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [lo, hi]");
    return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

CoreSpec core_from_json(const json& j, const std::string& path) {
    CoreSpec c;
    c.core_id = string_field(j, "id", path);
    if (auto it = j.find("position_um"); it != j.end()) {
        auto p = pair_field(*it, path + ".position_um");
        c.position_um = {p[0], p[1]};
    }
    c.length_m = number_field(j, "length_m", path);
    c.group_index = number_or(j, "group_index", path, c.group_index);
    c.skew_offset_s = number_or(j, "skew_offset_s", path, 0.0);
    c.tdc_ppm_per_k = number_or(j, "tdc_ppm_per_k", path, c.tdc_ppm_per_k);
    c.end_reflectance = number_or(j, "end_reflectance", path, 1.0);
    if (auto it = j.find("pmd"); it != j.end()) {
        PmdModelSpec m;
        const std::string p2 = path + ".pmd";
        m.mean_dgd_s = number_field(*it, "mean_dgd_s", p2);
        m.n_segments = static_cast<int>(number_or(*it, "n_segments", p2, 100));
        m.seed = static_cast<std::uint64_t>(number_or(*it, "seed", p2, 0));
        c.birefringence = m;
    }
    return c;
}

json core_to_json(const CoreSpec& c) {
    json j{{"id", c.core_id},
           {"position_um", {c.position_um[0], c.position_um[1]}},
           {"length_m", c.length_m},
           {"group_index", c.group_index},
           {"skew_offset_s", c.skew_offset_s},
           {"tdc_ppm_per_k", c.tdc_ppm_per_k},
           {"end_reflectance", c.end_reflectance}};
    if (c.birefringence) {
        j["pmd"] = {{"mean_dgd_s", c.birefringence->mean_dgd_s},
                    {"n_segments", c.birefringence->n_segments},
                    {"seed", c.birefringence->seed}};
    }
    return j;
}

}  // namespace

std::string to_string(FrontendKind kind) {
    return kind == FrontendKind::adc7 ? "adc7" : "slicer1";
}

FrontendKind frontend_from_string(const std::string& name) {
    if (name == "adc7") return FrontendKind::adc7;
    if (name == "slicer1") return FrontendKind::slicer1;
    throw ConfigError("unknown frontend '" + name + "' (expected adc7 or slicer1)");
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;

    const json& jf = require(j, "fiber", "");
    cfg.fiber.name = jf.value("name", std::string("fiber"));
    cfg.fiber.center_core_id = string_field(jf, "center_core_id", "fiber");
    cfg.fiber.reference_reflector_delay_s =
        number_or(jf, "reference_reflector_delay_s", "fiber", 1e-6);
    cfg.fiber.reference_reflectance = number_or(jf, "reference_reflectance", "fiber", 0.04);
    cfg.fiber.splitter_excess_delay_s =
        number_or(jf, "splitter_excess_delay_s", "fiber", 0.0);
    cfg.fiber.backscatter_level = number_or(jf, "backscatter_level", "fiber", 0.0);
    cfg.fiber.backscatter_alpha_db_per_km =
        number_or(jf, "backscatter_alpha_db_per_km", "fiber", 0.2);
    cfg.fiber.delay_jitter_sigma_s = number_or(jf, "delay_jitter_sigma_s", "fiber", 0.0);
    const json& jcores = require(jf, "cores", "fiber");
    if (!jcores.is_array() || jcores.empty()) fail("fiber.cores", "expected a non-empty array");
    for (std::size_t i = 0; i < jcores.size(); ++i)
        cfg.fiber.cores.push_back(
            core_from_json(jcores[i], "fiber.cores[" + std::to_string(i) + "]"));
    cfg.fiber.validate();

    if (auto it = j.find("probe"); it != j.end()) {
        const json& jp = *it;
        cfg.probe.prbs_order = static_cast<int>(number_or(jp, "prbs_order", "probe", 15));
        cfg.probe.prbs_seed =
            static_cast<std::uint64_t>(number_or(jp, "prbs_seed", "probe", 1));
        cfg.probe.bit_rate_hz = number_or(jp, "bit_rate_hz", "probe", 10e9);
        cfg.probe.fill_duration_s = number_or(jp, "fill_duration_s", "probe", 60e-6);
        cfg.probe.rise_time_s = number_or(jp, "rise_time_s", "probe", 30e-12);
    }
    if (auto it = j.find("receiver"); it != j.end()) {
        const json& jr = *it;
        cfg.receiver.sample_rate_hz = number_or(jr, "sample_rate_hz", "receiver", 50e9);
        cfg.receiver.noise_sigma = number_or(jr, "noise_sigma", "receiver", 6.25e-3);
        if (jr.contains("frontend"))
            cfg.receiver.frontend =
                frontend_from_string(string_field(jr, "frontend", "receiver"));
        cfg.receiver.n_traces =
            static_cast<std::size_t>(number_or(jr, "n_traces", "receiver", 1000));
        cfg.receiver.adc_bits = static_cast<int>(number_or(jr, "adc_bits", "receiver", 7));
        if (jr.contains("full_scale"))
            cfg.receiver.full_scale = pair_field(jr.at("full_scale"), "receiver.full_scale");
        if (jr.contains("slicer_threshold") && !jr.at("slicer_threshold").is_null())
            cfg.receiver.slicer_threshold =
                as_number(jr.at("slicer_threshold"), "receiver.slicer_threshold");
        if (jr.contains("slicer_sample_rate_hz") && !jr.at("slicer_sample_rate_hz").is_null())
            cfg.receiver.slicer_sample_rate_hz =
                as_number(jr.at("slicer_sample_rate_hz"), "receiver.slicer_sample_rate_hz");
        if (jr.contains("exact_frontend")) {
            if (!jr.at("exact_frontend").is_boolean())
                fail("receiver.exact_frontend", "expected a boolean");
            cfg.receiver.exact_frontend = jr.at("exact_frontend").get<bool>();
        }
    }
    if (auto it = j.find("environment"); it != j.end()) {
        cfg.environment.temperature_c = number_or(*it, "temperature_c", "environment", 20.0);
        cfg.environment.reference_temperature_c =
            number_or(*it, "reference_temperature_c", "environment", 20.0);
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        cfg.sweep.start_c = number_or(*it, "start_c", "sweep", 10.0);
        cfg.sweep.stop_c = number_or(*it, "stop_c", "sweep", 50.0);
        cfg.sweep.step_k = number_or(*it, "step_k", "sweep", 10.0);
        if (!(cfg.sweep.step_k > 0.0)) fail("sweep.step_k", "must be > 0");
        if (cfg.sweep.stop_c < cfg.sweep.start_c) fail("sweep", "stop_c below start_c");
    }
    if (auto it = j.find("pmd_measurement"); it != j.end()) {
        const json& jm = *it;
        if (jm.contains("band_m"))
            cfg.pmd.band_m = pair_field(jm.at("band_m"), "pmd_measurement.band_m");
        cfg.pmd.n_points =
            static_cast<int>(number_or(jm, "n_points", "pmd_measurement", 64));
        cfg.pmd.mod_freq_hz = number_or(jm, "mod_freq_hz", "pmd_measurement", 200e6);
        if (jm.contains("sops")) {
            const json& js = jm.at("sops");
            if (!js.is_array() || js.size() != 4)
                fail("pmd_measurement.sops", "expected 4 Stokes vectors");
            for (int k = 0; k < 4; ++k) {
                const json& v = js[k];
                const std::string p = "pmd_measurement.sops[" + std::to_string(k) + "]";
                if (!v.is_array() || v.size() != 3) fail(p, "expected [s1, s2, s3]");
                cfg.pmd.sops[k] = {as_number(v[0], p), as_number(v[1], p),
                                   as_number(v[2], p)};
                if (std::abs(cfg.pmd.sops[k].norm() - 1.0) > 1e-9)
                    fail(p, "must be a unit vector");
            }
        }
    }
    if (auto it = j.find("analysis"); it != j.end()) {
        cfg.analysis.peak_threshold = number_or(*it, "peak_threshold", "analysis", 8.0);
        cfg.analysis.min_separation_s =
            number_or(*it, "min_separation_s", "analysis", 1e-9);
        cfg.analysis.fit_half_window = static_cast<std::size_t>(
            number_or(*it, "fit_half_window", "analysis", 0));
        cfg.analysis.assignment_window_s =
            number_or(*it, "assignment_window_s", "analysis", 1e-9);
    }
    return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    json jf{{"name", cfg.fiber.name},
            {"center_core_id", cfg.fiber.center_core_id},
            {"reference_reflector_delay_s", cfg.fiber.reference_reflector_delay_s},
            {"reference_reflectance", cfg.fiber.reference_reflectance},
            {"splitter_excess_delay_s", cfg.fiber.splitter_excess_delay_s},
            {"backscatter_level", cfg.fiber.backscatter_level},
            {"backscatter_alpha_db_per_km", cfg.fiber.backscatter_alpha_db_per_km},
            {"delay_jitter_sigma_s", cfg.fiber.delay_jitter_sigma_s}};
    json jcores = json::array();
    for (const auto& c : cfg.fiber.cores) jcores.push_back(core_to_json(c));
    jf["cores"] = jcores;

    json jr{{"sample_rate_hz", cfg.receiver.sample_rate_hz},
            {"noise_sigma", cfg.receiver.noise_sigma},
            {"frontend", to_string(cfg.receiver.frontend)},
            {"n_traces", cfg.receiver.n_traces},
            {"adc_bits", cfg.receiver.adc_bits},
            {"exact_frontend", cfg.receiver.exact_frontend}};
    if (cfg.receiver.full_scale)
        jr["full_scale"] = {(*cfg.receiver.full_scale)[0], (*cfg.receiver.full_scale)[1]};
    if (cfg.receiver.slicer_threshold) jr["slicer_threshold"] = *cfg.receiver.slicer_threshold;
    if (cfg.receiver.slicer_sample_rate_hz)
        jr["slicer_sample_rate_hz"] = *cfg.receiver.slicer_sample_rate_hz;

    json jsops = json::array();
    for (const auto& s : cfg.pmd.sops) jsops.push_back({s.s1, s.s2, s.s3});

    return json{
        {"fiber", jf},
        {"probe",
         {{"prbs_order", cfg.probe.prbs_order},
          {"prbs_seed", cfg.probe.prbs_seed},
          {"bit_rate_hz", cfg.probe.bit_rate_hz},
          {"fill_duration_s", cfg.probe.fill_duration_s},
          {"rise_time_s", cfg.probe.rise_time_s}}},
        {"receiver", jr},
        {"environment",
         {{"temperature_c", cfg.environment.temperature_c},
          {"reference_temperature_c", cfg.environment.reference_temperature_c}}},
        {"sweep",
         {{"start_c", cfg.sweep.start_c},
          {"stop_c", cfg.sweep.stop_c},
          {"step_k", cfg.sweep.step_k}}},
        {"pmd_measurement",
         {{"band_m", {cfg.pmd.band_m[0], cfg.pmd.band_m[1]}},
          {"n_points", cfg.pmd.n_points},
          {"mod_freq_hz", cfg.pmd.mod_freq_hz},
          {"sops", jsops}}},
        {"analysis",
         {{"peak_threshold", cfg.analysis.peak_threshold},
          {"min_separation_s", cfg.analysis.min_separation_s},
          {"fit_half_window", cfg.analysis.fit_half_window},
          {"assignment_window_s", cfg.analysis.assignment_window_s}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offset -> line number for a friendlier message.
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(path.string() + ":" + std::to_string(line) +
                          ": JSON parse error: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::uint64_t config_hash(const nlohmann::json& canonical) {
    const std::string dump = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace cotdr
