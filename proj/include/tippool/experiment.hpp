#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tippool/delay_model.hpp"
#include "tippool/quarantine.hpp"

namespace tippool {

enum class Mode { Analytic, Simulate, Sweep, Compare, QuarantineDemo };

const char* to_string(Mode m);
Mode parse_mode(std::string_view name);

/// Configuration problem, tagged with the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Fractions 0, 0.1, ..., 1.0.
std::vector<double> default_fractions();

struct ExperimentConfig {
    Mode mode = Mode::Analytic;
    TwoClassParams params;               ///< value_fraction is the single point for `simulate`
    std::optional<ModelParams> classes;  ///< explicit n-class model (analytic / simulate only)
    std::vector<double> fractions = default_fractions();
    std::uint64_t arrivals = 1'000'000;
    std::uint64_t seed = 42;
    double warmup = 0.2;
    bool adaptive = false;
    unsigned k_max = 8;
    std::optional<double> window;  ///< controller window; default 10 * (h + d_Q)
    double tolerance = 0.05;       ///< `compare` pass threshold on rel_error
    unsigned threads = 1;
    double conflict_at = 3.0;      ///< arrival of the double spend in `quarantine-demo`
    std::string out_dir = ".";
    bool svg = false;

    /// Throws ConfigError.
    void validate() const;
};

/// Parses a flat JSON object. Missing keys keep their defaults; unknown
/// keys and invalid values raise ConfigError naming the key.
ExperimentConfig parse_config(std::string_view json_text);

/// Reads and parses a config file.
ExperimentConfig load_config(const std::string& path);

/// Effective configuration as a JSON object (every key, after defaulting).
std::string config_to_json(const ExperimentConfig& config);

struct SweepRow {
    double p = 0.0;
    double l_analytic = 0.0;
    std::optional<double> l_minus;
    std::optional<double> l_plus;
    std::optional<double> l_sim_mean;
    std::optional<double> l_sim_stddev;
    unsigned k_used = 0;
    std::optional<double> rel_error;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool residual_checks_passed = true;
    bool within_tolerance = true;  ///< every rel_error <= tolerance
    double max_rel_error = 0.0;
    std::vector<TranscriptLine> transcript;  ///< quarantine-demo only
};

inline constexpr std::string_view kCsvHeader = "p,L_analytic,L_minus,L_plus,L_sim_mean,L_sim_stddev,k_used,rel_error";

SweepReport run_experiment(const ExperimentConfig& config);

std::string format_csv(const SweepReport& report);
std::string summary_json(const ExperimentConfig& config, const SweepReport& report);
std::string render_svg(const ExperimentConfig& config, const SweepReport& report);

/// Writes report.csv, summary.json and (when enabled) chart.svg, or
/// transcript.txt for the quarantine demo, into config.out_dir.
/// Returns the paths written. Throws std::runtime_error on I/O failure.
std::vector<std::string> write_outputs(const ExperimentConfig& config, const SweepReport& report);

/// 0 when the run completed and every check passed.
int exit_code(const ExperimentConfig& config, const SweepReport& report);

}  // namespace tippool
