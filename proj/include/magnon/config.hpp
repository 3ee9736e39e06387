// config.hpp: line-oriented `key = value` run configuration.
//
// Physical keys carry their unit as a suffix (_ghz, _mhz, _ns); values are
// "f/2pi" style and converted to rad/ns on load. Decay rates follow
// rate_convention (see RateConvention). Unspecified keys keep the default
// parameter set.

#pragma once

#include "magnon/hamiltonian.hpp"
#include "magnon/protocol.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace magnon {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct RunConfig {
    PhysicalParams params;
    std::size_t n{2};
    bool equalize{true};
    std::optional<double> qubit_duration;  // ns; used when equalize is off
    SwapMode swap{SwapMode::automatic};
    Engine engine{Engine::lindblad};
    std::optional<double> step;  // ns
    std::optional<std::string> output;
    std::size_t truncation{2};
    RateConvention rates{RateConvention::linear};
    // realism flags
    bool residual_qm{false};
    std::optional<double> idle_detuning;  // rad/ns
    PhaseClock clock{PhaseClock::global};

    ExecuteOptions execute_options() const;
    ProtocolSchedule schedule() const;
};

// Throws ConfigError carrying the offending line (0 when not tied to a line).
RunConfig parse_config(const std::string& text);

// Re-applies n-dependent sizing and the far-detuning check after command-line overrides.
void finalize_config(RunConfig& config);

}  // namespace magnon
