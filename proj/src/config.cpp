#include "fluoro/config.hpp"
#include "fluoro/io.hpp"
#include <cmath>
#include <set>

namespace fluoro {

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key: " + where + "." + it.key());
}

double need_num(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing config key: " + where + "." + key);
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj[key].get<double>();
}

double opt_num(const json& obj, const std::string& where, const std::string& key, double dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj[key].get<double>();
}

bool opt_bool(const json& obj, const std::string& where, const std::string& key, bool dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
    return obj[key].get<bool>();
}

void check(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

EmitterParams parse_emitter(const json& e) {
    reject_unknown(e, "emitter", {"lifetime_s", "gamma_rad_per_s", "detuning_rad_per_s",
                                  "s0", "rabi_rad_per_s"});
    bool has_life = e.contains("lifetime_s"), has_gamma = e.contains("gamma_rad_per_s");
    check(has_life != has_gamma, "emitter needs exactly one of lifetime_s / gamma_rad_per_s");
    double gamma = has_life ? 1.0 / (2.0 * need_num(e, "emitter", "lifetime_s"))
                            : need_num(e, "emitter", "gamma_rad_per_s");
    check(gamma > 0 && std::isfinite(gamma), "emitter decay rate must be positive and finite");
    double delta = opt_num(e, "emitter", "detuning_rad_per_s", 0.0);
    bool has_s0 = e.contains("s0"), has_rabi = e.contains("rabi_rad_per_s");
    check(!(has_s0 && has_rabi), "emitter needs at most one of s0 / rabi_rad_per_s");
    double omega = has_rabi ? need_num(e, "emitter", "rabi_rad_per_s")
                            : gamma * std::sqrt(2.0 * opt_num(e, "emitter", "s0", 0.10));
    check(omega >= 0 && std::isfinite(omega), "emitter drive must be non-negative and finite");
    return {gamma, delta, omega};
}

InterferometerConfig parse_interferometer(const json& i) {
    reject_unknown(i, "interferometer", {"delay_a_s", "delay_b_s", "phase_a_rad", "phase_b_rad"});
    InterferometerConfig c;
    c.delay_a = opt_num(i, "interferometer", "delay_a_s", 46.1e-9);
    c.delay_b = opt_num(i, "interferometer", "delay_b_s", 46.7e-9);
    c.phase_a = opt_num(i, "interferometer", "phase_a_rad", 0.0);
    c.phase_b = opt_num(i, "interferometer", "phase_b_rad", 0.0);
    check(c.delay_a > 0 && c.delay_b > 0, "interferometer delays must be positive");
    return c;
}

SimulationConfig parse_simulation(const json& s) {
    reject_unknown(s, "simulation",
                   {"duration_s", "efficiency", "splitter_ratio", "detuning_jitter_rad_per_s",
                    "chunks", "write_events", "duty_cycle", "blinking"});
    SimulationConfig c;
    c.duration_s = opt_num(s, "simulation", "duration_s", 1.0);
    c.efficiency = opt_num(s, "simulation", "efficiency", 1.0);
    c.splitter_ratio = opt_num(s, "simulation", "splitter_ratio", 0.5);
    c.detuning_jitter_rad_per_s = opt_num(s, "simulation", "detuning_jitter_rad_per_s", 0.0);
    c.chunks = int(opt_num(s, "simulation", "chunks", 16));
    c.write_events = opt_bool(s, "simulation", "write_events", false);
    check(c.duration_s > 0, "simulation.duration_s must be positive");
    check(c.efficiency >= 0 && c.efficiency <= 1, "simulation.efficiency must be in [0,1]");
    check(c.splitter_ratio > 0 && c.splitter_ratio < 1, "simulation.splitter_ratio must be in (0,1)");
    check(c.chunks >= 1 && c.chunks <= 4096, "simulation.chunks must be in [1,4096]");
    if (s.contains("duty_cycle")) {
        const json& d = s["duty_cycle"];
        reject_unknown(d, "simulation.duty_cycle", {"on_s", "period_s"});
        DutyCycleConfig dc;
        dc.on_s = need_num(d, "simulation.duty_cycle", "on_s");
        dc.period_s = need_num(d, "simulation.duty_cycle", "period_s");
        check(dc.on_s > 0 && dc.on_s <= dc.period_s, "duty cycle needs 0 < on_s <= period_s");
        c.duty_cycle = dc;
    }
    if (s.contains("blinking")) {
        const json& b = s["blinking"];
        reject_unknown(b, "simulation.blinking", {"amplitude", "t_bunch_s"});
        BlinkingConfig bc;
        bc.amplitude = need_num(b, "simulation.blinking", "amplitude");
        bc.t_bunch_s = need_num(b, "simulation.blinking", "t_bunch_s");
        check(bc.amplitude >= 0 && bc.amplitude <= 1, "blinking.amplitude must be in [0,1]");
        check(bc.amplitude == 0 || bc.t_bunch_s > 0, "blinking.t_bunch_s must be positive");
        c.blinking = bc;
    }
    return c;
}

AnalysisConfig parse_analysis(const json& a) {
    reject_unknown(a, "analysis",
                   {"window_half_width_s", "window_center_s", "scan_mode", "scan_windows_s",
                    "bin_width_s", "span_s", "fit_min_tau_s", "zz_normalized"});
    AnalysisConfig c;
    c.window_half_width_s = opt_num(a, "analysis", "window_half_width_s", 10e-9);
    c.window_center_s = opt_num(a, "analysis", "window_center_s", 0.0);
    if (a.contains("scan_mode")) {
        if (!a["scan_mode"].is_string()) throw ConfigError("analysis.scan_mode must be a string");
        c.scan_mode = a["scan_mode"].get<std::string>();
    }
    check(c.scan_mode == "four_amplitude" || c.scan_mode == "smax_g2_average",
          "analysis.scan_mode must be four_amplitude or smax_g2_average");
    if (a.contains("scan_windows_s")) {
        if (!a["scan_windows_s"].is_array()) throw ConfigError("analysis.scan_windows_s must be an array");
        double prev = 0;
        for (const auto& v : a["scan_windows_s"]) {
            if (!v.is_number()) throw ConfigError("analysis.scan_windows_s entries must be numbers");
            double w = v.get<double>();
            check(w > prev, "analysis.scan_windows_s must be positive and strictly increasing");
            c.scan_windows_s.push_back(w);
            prev = w;
        }
    }
    c.bin_width_s = opt_num(a, "analysis", "bin_width_s", 2e-9);
    c.span_s = opt_num(a, "analysis", "span_s", 150e-9);
    c.fit_min_tau_s = opt_num(a, "analysis", "fit_min_tau_s", 0.0);
    c.zz_normalized = opt_bool(a, "analysis", "zz_normalized", true);
    check(c.window_half_width_s > 0, "analysis.window_half_width_s must be positive");
    check(c.bin_width_s > 0 && c.span_s > 0, "analysis bin/span must be positive");
    return c;
}

TomographyConfig parse_tomography(const json& t) {
    reject_unknown(t, "tomography", {"records_path", "n_bootstrap", "n_starts",
                                     "zz_window_half_width_s", "zz_record_n"});
    TomographyConfig c;
    if (t.contains("records_path")) {
        if (!t["records_path"].is_string()) throw ConfigError("tomography.records_path must be a string");
        c.records_path = t["records_path"].get<std::string>();
    }
    c.n_bootstrap = int(opt_num(t, "tomography", "n_bootstrap", 100));
    c.n_starts = int(opt_num(t, "tomography", "n_starts", 10));
    c.zz_window_half_width_s = opt_num(t, "tomography", "zz_window_half_width_s", 10e-9);
    c.zz_record_n = opt_num(t, "tomography", "zz_record_n", 123.0);
    check(c.n_bootstrap >= 0, "tomography.n_bootstrap must be >= 0");
    check(c.n_starts >= 1, "tomography.n_starts must be >= 1");
    check(c.zz_window_half_width_s > 0, "tomography.zz_window_half_width_s must be positive");
    check(c.zz_record_n > 0, "tomography.zz_record_n must be positive");
    return c;
}

PairRateConfig parse_pair_rate(const json& p) {
    reject_unknown(p, "pair_rate", {"omega_over_gamma_max", "n_points"});
    PairRateConfig c;
    c.omega_over_gamma_max = opt_num(p, "pair_rate", "omega_over_gamma_max", 10.0);
    c.n_points = int(opt_num(p, "pair_rate", "n_points", 200));
    check(c.omega_over_gamma_max > 0, "pair_rate.omega_over_gamma_max must be positive");
    check(c.n_points >= 2, "pair_rate.n_points must be >= 2");
    return c;
}

} // namespace

Config parse_config(const json& j, const std::filesystem::path& source_dir) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(j, "$", {"description", "seed", "emitter", "interferometer", "simulation",
                            "analysis", "tomography", "pair_rate"});
    Config c;
    c.source_dir = source_dir;
    if (j.contains("description")) {
        if (!j["description"].is_string()) throw ConfigError("description must be a string");
        c.description = j["description"].get<std::string>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("seed must be a non-negative integer");
        long long s = j["seed"].get<long long>();
        check(s >= 0, "seed must be non-negative");
        c.seed = uint64_t(s);
    }
    if (!j.contains("emitter")) throw ConfigError("missing config section: emitter");
    c.emitter = parse_emitter(j["emitter"]);
    if (j.contains("interferometer")) c.interferometer = parse_interferometer(j["interferometer"]);
    else c.interferometer = {46.1e-9, 46.7e-9, 0.0, 0.0};
    if (j.contains("simulation")) c.simulation = parse_simulation(j["simulation"]);
    if (j.contains("analysis")) c.analysis = parse_analysis(j["analysis"]);
    if (j.contains("tomography")) c.tomography = parse_tomography(j["tomography"]);
    if (j.contains("pair_rate")) c.pair_rate = parse_pair_rate(j["pair_rate"]);
    c.canonical = j.dump();  // nlohmann objects iterate key-sorted
    c.hash = fnv1a64(c.canonical);
    return c;
}

Config load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.has_parent_path() ? path.parent_path() : ".");
}

// ---- mini schema validator ---------------------------------------------------

namespace {

bool type_matches(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "number") return v.is_number();
    if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    throw ConfigError("schema uses unsupported type: " + t);
}

} // namespace

void validate_against_schema(const json& value, const json& schema, const std::string& where) {
    if (!schema.is_object()) throw ConfigError("schema node must be an object at " + where);
    if (schema.contains("type")) {
        const json& t = schema["type"];
        bool ok = false;
        if (t.is_string()) ok = type_matches(value, t.get<std::string>());
        else if (t.is_array()) {
            for (const auto& ti : t) ok = ok || type_matches(value, ti.get<std::string>());
        }
        if (!ok) throw ConfigError("schema type mismatch at " + where);
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema["enum"]) ok = ok || e == value;
        if (!ok) throw ConfigError("value not in schema enum at " + where);
    }
    if (value.is_number()) {
        double x = value.get<double>();
        if (schema.contains("minimum") && x < schema["minimum"].get<double>())
            throw ConfigError("value below schema minimum at " + where);
        if (schema.contains("maximum") && x > schema["maximum"].get<double>())
            throw ConfigError("value above schema maximum at " + where);
        if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
            throw ConfigError("value not above schema exclusiveMinimum at " + where);
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& r : schema["required"])
                if (!value.contains(r.get<std::string>()))
                    throw ConfigError("missing required key " + r.get<std::string>() + " at " + where);
        const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
        bool allow_extra = true;
        if (schema.contains("additionalProperties") && schema["additionalProperties"].is_boolean())
            allow_extra = schema["additionalProperties"].get<bool>();
        for (auto it = value.begin(); it != value.end(); ++it) {
            if (props && props->contains(it.key()))
                validate_against_schema(it.value(), (*props)[it.key()], where + "." + it.key());
            else if (!allow_extra)
                throw ConfigError("unexpected key " + it.key() + " at " + where);
        }
    }
    if (value.is_array() && schema.contains("items")) {
        size_t k = 0;
        for (const auto& v : value)
            validate_against_schema(v, schema["items"], where + "[" + std::to_string(k++) + "]");
        if (schema.contains("minItems") && value.size() < schema["minItems"].get<size_t>())
            throw ConfigError("array shorter than schema minItems at " + where);
    }
}

} // namespace fluoro
