#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hbf/numerics.hpp"

namespace hbf {

/// Raised when a configuration violates a constraint; the message names the field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Scenario dimensions and physical parameters. Power and noise are linear.
struct SystemConfig {
    Index tx_antennas = 1;       // N
    Index rx_antennas = 1;       // M
    Index users = 1;             // K
    Index streams_per_user = 1;  // d
    Index rf_chains_tx = 1;
    Index rf_chains_rx = 1;
    double power = 1.0;          // P
    double noise_power = 1.0;    // sigma^2
    std::vector<double> weights; // beta_k; empty means all ones
    int phase_bits = 0;          // 0 = infinite resolution
    Index paths = 1;             // L
    double antenna_spacing = 0.5;  // element spacing over wavelength

    Index total_streams() const { return users * streams_per_user; }
    RVector weight_vector() const;

    /// Throws ConfigError on the first violated constraint.
    void validate() const;

    bool operator==(const SystemConfig&) const = default;
};

}  // namespace hbf
