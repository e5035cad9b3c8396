#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hbf/channel.hpp"
#include "hbf/system.hpp"

namespace hbf {

inline constexpr const char* kToolkitVersion = "0.1.0";

enum class Scenario { kP2pMimo, kMuMiso };

std::string scenario_name(Scenario s);

/// One Monte Carlo experiment. cfg.power and cfg.noise_power are overwritten
/// per SNR point (noise 1, P = 10^(snr/10)).
struct SweepSpec {
    Scenario scenario = Scenario::kP2pMimo;
    SystemConfig cfg;
    std::vector<double> snr_grid_db;
    std::vector<std::string> methods;
    int trials = 100;
    std::uint64_t master_seed = 0;
    std::string channel_source = "generate";  // or a dataset path

    bool operator==(const SweepSpec&) const = default;
};

/// JSON config. Top-level keys: scenario, system, snr_db, methods, trials,
/// master_seed, channels. Unknown keys, wrong types and constraint violations
/// raise ConfigError naming the offending field.
SweepSpec parse_config(const std::string& text);
SweepSpec load_config(const std::filesystem::path& path);

/// Fully expanded config with sorted keys; parse_config(canonical_config(s)) == s.
std::string canonical_config(const SweepSpec& spec);

/// FNV-1a 64 of the canonical config.
std::uint64_t config_hash(const SweepSpec& spec);

/// Method identifiers accepted for the scenario, with <k> standing for a bit count.
std::vector<std::string> registered_methods(Scenario s);
bool is_registered_method(Scenario s, const std::string& method);

/// Weighted sum rate (bps/Hz) of one method on one realization. cfg carries the
/// power and noise of the SNR point. Throws on design failure.
double evaluate_method(Scenario s, const std::string& method, const ChannelRealization& channel,
                       const SystemConfig& cfg);

struct SweepRow {
    double snr_db = 0.0;
    std::string method;
    double mean_rate = 0.0;
    double std_rate = 0.0;
    int trials = 0;    // trials contributing to the mean
    int failures = 0;  // trials whose design threw or returned a non-finite rate
};

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::string version = kToolkitVersion;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // SNR-major, methods in spec order
    Provenance provenance;

    const SweepRow& row(double snr_db, const std::string& method) const;
};

/// Raised when more than 1% of the trials of some (snr, method) cell fail.
class SweepAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepOptions {
    int jobs = 1;
};

/// Realization used by trial t (generated from child_seed(master_seed, t) or
/// read from the dataset named by channel_source).
std::vector<ChannelRealization> sweep_channels(const SweepSpec& spec);

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& opts = {});

std::string format_csv(const SweepResult& result);
void write_csv(const SweepResult& result, const std::filesystem::path& path);

std::string format_svg(const SweepResult& result);
void render_chart(const SweepResult& result, const std::filesystem::path& path);

}  // namespace hbf
