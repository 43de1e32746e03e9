#pragma once
// Strict JSON run configuration.  Unknown keys are rejected (typos should
// fail loudly, not silently fall back to defaults).  The emitter section is
// required and needs exactly one of lifetime_s / gamma_rad_per_s; everything
// else has defaults (detuning 0, s0 = 0.10, delays 46.1/46.7 ns).
#include <json.hpp>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>
#include "fluoro/units.hpp"
#include "fluoro/errors.hpp"

namespace fluoro {

using json = nlohmann::json;

struct DutyCycleConfig {
    double on_s = 0, period_s = 0;
};

struct BlinkingConfig {
    double amplitude = 0, t_bunch_s = 0;
};

struct SimulationConfig {
    double duration_s = 1.0;
    double efficiency = 1.0;
    double splitter_ratio = 0.5;
    double detuning_jitter_rad_per_s = 0.0;
    int chunks = 16;  // fixed work decomposition; independent of thread count
    bool write_events = false;
    std::optional<DutyCycleConfig> duty_cycle;
    std::optional<BlinkingConfig> blinking;
};

struct AnalysisConfig {
    double window_half_width_s = 10e-9;
    double window_center_s = 0.0;
    std::string scan_mode = "four_amplitude";  // or "smax_g2_average"
    std::vector<double> scan_windows_s;        // empty -> default grid
    double bin_width_s = 2e-9;
    double span_s = 150e-9;
    double fit_min_tau_s = 0.0;
    bool zz_normalized = true;
};

struct TomographyConfig {
    std::string records_path;  // relative to the config file
    int n_bootstrap = 100;
    int n_starts = 10;
    double zz_window_half_width_s = 10e-9;
    double zz_record_n = 123.0;
};

struct PairRateConfig {
    double omega_over_gamma_max = 10.0;
    int n_points = 200;
};

struct Config {
    std::string description;
    uint64_t seed = 1;
    EmitterParams emitter{};
    InterferometerConfig interferometer{};
    SimulationConfig simulation{};
    AnalysisConfig analysis{};
    TomographyConfig tomography{};
    PairRateConfig pair_rate{};

    std::filesystem::path source_dir;  // directory of the config file
    std::string canonical;             // key-sorted dump used for hashing
    uint64_t hash = 0;
};

Config parse_config(const json& j, const std::filesystem::path& source_dir = ".");
Config load_config(const std::filesystem::path& path);

// minimal structural JSON-schema check (type/properties/required/
// additionalProperties/items/enum/min/max); throws ConfigError on violation
void validate_against_schema(const json& value, const json& schema,
                             const std::string& where = "$");

} // namespace fluoro
