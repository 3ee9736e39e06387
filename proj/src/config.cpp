#include "magnon/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace magnon {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    std::size_t line;
};

double number(const Entry& e) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (e.value.empty() || used != e.value.size() || !std::isfinite(v)) {
        throw ConfigError(e.line, "value '" + e.value + "' is not a number");
    }
    return v;
}

std::size_t count(const Entry& e) {
    const double v = number(e);
    if (v < 0.0 || v != std::floor(v)) throw ConfigError(e.line, "value '" + e.value + "' is not a whole number");
    return static_cast<std::size_t>(v);
}

bool boolean(const Entry& e) {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError(e.line, "value '" + e.value + "' is not a boolean");
}

// Stems whose values carry a frequency unit, and those that carry a time unit.
const std::vector<std::string> frequency_stems = {"omega_q", "omega_a", "lambda_q", "lambda_m",
                                                   "kappa_m", "kappa_a", "gamma_q", "idle_detuning"};
const std::vector<std::string> time_stems = {"step", "qubit_duration"};
const std::vector<std::string> plain_keys = {"n",        "equalize",   "engine",          "output",
                                             "truncation", "residual_qm", "phase_clock", "rate_convention",
                                             "swap_mode", "gyromagnetic_ratio_ghz_per_t"};

// Splits e.g. "lambda_m2_mhz" into ("lambda_m", 2, "mhz"); index 0 means "all modes".
struct KeyParts {
    std::string stem;
    std::size_t index{0};
    std::string unit;
};

std::optional<KeyParts> split_key(const std::string& key) {
    for (const auto& stems : {frequency_stems, time_stems}) {
        for (const auto& stem : stems) {
            if (!key.starts_with(stem)) continue;
            std::string rest = key.substr(stem.size());
            KeyParts parts{stem, 0, {}};
            std::size_t digits = 0;
            while (digits < rest.size() && std::isdigit(static_cast<unsigned char>(rest[digits]))) ++digits;
            if (digits) {
                if (stem != "lambda_m" && stem != "kappa_m" && stem != "kappa_a") continue;
                parts.index = std::stoul(rest.substr(0, digits));
                rest = rest.substr(digits);
            }
            if (rest.empty()) return parts;
            if (rest.front() != '_') continue;
            parts.unit = rest.substr(1);
            return parts;
        }
    }
    return std::nullopt;
}

bool is_rate(const std::string& stem) { return stem == "kappa_m" || stem == "kappa_a" || stem == "gamma_q"; }

}  // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, Entry> plain;
    std::vector<std::pair<KeyParts, Entry>> physical;

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const Entry entry{trim(line.substr(eq + 1)), line_no};
        if (key.empty()) throw ConfigError(line_no, "missing key");
        if (entry.value.empty()) throw ConfigError(line_no, "missing value for '" + key + "'");

        if (std::find(plain_keys.begin(), plain_keys.end(), key) != plain_keys.end()) {
            plain[key] = entry;
            continue;
        }
        const auto parts = split_key(key);
        if (!parts) throw ConfigError(line_no, "unknown key '" + key + "'");
        const bool is_time = std::find(time_stems.begin(), time_stems.end(), parts->stem) != time_stems.end();
        if (parts->unit.empty()) throw ConfigError(line_no, "key '" + key + "' is missing its unit suffix");
        if (is_time ? parts->unit != "ns" : (parts->unit != "ghz" && parts->unit != "mhz")) {
            throw ConfigError(line_no, "key '" + key + "' has unsupported unit '" + parts->unit + "'");
        }
        physical.emplace_back(*parts, entry);
    }

    RunConfig cfg;
    if (auto it = plain.find("n"); it != plain.end()) {
        cfg.n = count(it->second);
        if (cfg.n < 2 || cfg.n > 8) throw ConfigError(it->second.line, "n must be between 2 and 8");
    }
    if (auto it = plain.find("rate_convention"); it != plain.end()) {
        if (it->second.value == "linear") cfg.rates = RateConvention::linear;
        else if (it->second.value == "angular") cfg.rates = RateConvention::angular;
        else throw ConfigError(it->second.line, "rate_convention must be 'linear' or 'angular'");
    }
    if (auto it = plain.find("equalize"); it != plain.end()) cfg.equalize = boolean(it->second);
    if (auto it = plain.find("residual_qm"); it != plain.end()) cfg.residual_qm = boolean(it->second);
    if (auto it = plain.find("engine"); it != plain.end()) {
        try {
            cfg.engine = engine_from_string(it->second.value);
        } catch (const std::exception& e) {
            throw ConfigError(it->second.line, e.what());
        }
    }
    if (auto it = plain.find("output"); it != plain.end()) cfg.output = it->second.value;
    if (auto it = plain.find("truncation"); it != plain.end()) {
        cfg.truncation = count(it->second);
        if (cfg.truncation < 2) throw ConfigError(it->second.line, "truncation must be at least 2");
    }
    if (auto it = plain.find("phase_clock"); it != plain.end()) {
        if (it->second.value == "global") cfg.clock = PhaseClock::global;
        else if (it->second.value == "reset") cfg.clock = PhaseClock::segment_reset;
        else throw ConfigError(it->second.line, "phase_clock must be 'global' or 'reset'");
    }
    if (auto it = plain.find("swap_mode"); it != plain.end()) {
        const auto& v = it->second.value;
        if (v == "automatic") cfg.swap = SwapMode::automatic;
        else if (v == "simultaneous") cfg.swap = SwapMode::simultaneous;
        else if (v == "sequential") cfg.swap = SwapMode::sequential;
        else throw ConfigError(it->second.line, "swap_mode must be automatic, simultaneous or sequential");
    }

    cfg.params = PhysicalParams::defaults(cfg.n, cfg.rates);
    if (auto it = plain.find("gyromagnetic_ratio_ghz_per_t"); it != plain.end()) {
        cfg.params.gyromagnetic_ratio = from_ghz(number(it->second));
    }

    std::size_t guard_line = 0;
    // Whole-vector keys first so that per-mode keys override them regardless of order.
    std::stable_sort(physical.begin(), physical.end(),
                     [](const auto& a, const auto& b) { return (a.first.index == 0) > (b.first.index == 0); });
    for (const auto& [parts, entry] : physical) {
        const double raw_value = number(entry);
        const double scale = parts.unit == "ghz" ? 1e3 : 1.0;  // to MHz
        if (parts.unit == "ns") {
            if (!(raw_value > 0.0)) throw ConfigError(entry.line, "'" + parts.stem + "' must be positive");
            if (parts.stem == "step") cfg.step = raw_value;
            else cfg.qubit_duration = raw_value;
            continue;
        }
        const double mhz = raw_value * scale;
        if (is_rate(parts.stem) && mhz < 0.0) {
            throw ConfigError(entry.line, "decay rate '" + parts.stem + "' must be non-negative");
        }
        const double value = is_rate(parts.stem) ? rate_from_mhz(mhz, cfg.rates) : from_mhz(mhz);

        if (parts.stem == "omega_q") cfg.params.omega_q = value;
        else if (parts.stem == "omega_a") cfg.params.omega_a = value;
        else if (parts.stem == "lambda_q") cfg.params.lambda_q = value;
        else if (parts.stem == "gamma_q") cfg.params.gamma_q = value;
        else if (parts.stem == "idle_detuning") cfg.idle_detuning = value;
        else {
            auto& vec = parts.stem == "lambda_m" ? cfg.params.lambda_m
                        : parts.stem == "kappa_m" ? cfg.params.kappa_m
                                                  : cfg.params.kappa_a;
            if (parts.index == 0) {
                std::fill(vec.begin(), vec.end(), value);
            } else if (parts.index > vec.size()) {
                throw ConfigError(entry.line, "mode index " + std::to_string(parts.index) + " exceeds n");
            } else {
                vec[parts.index - 1] = value;
            }
        }
        if (parts.stem == "omega_q" || parts.stem == "omega_a" || parts.stem == "lambda_q") {
            guard_line = std::max(guard_line, entry.line);
        }
    }

    try {
        finalize_config(cfg);
    } catch (const ConfigError& e) {
        if (e.line() == 0 && guard_line != 0) {
            std::string msg = e.what();
            msg = msg.substr(msg.find(": ") + 2);
            throw ConfigError(guard_line, msg);
        }
        throw;
    }
    return cfg;
}

void finalize_config(RunConfig& cfg) {
    if (cfg.n < 2) throw ConfigError(0, "n must be at least 2");
    cfg.params = cfg.params.with_magnons(cfg.n);
    try {
        cfg.params.validate();
        if (cfg.engine == Engine::ideal_effective) cfg.params.check_far_detuning();
    } catch (const ParameterError& e) {
        throw ConfigError(0, e.what());
    }
}

ExecuteOptions RunConfig::execute_options() const {
    ExecuteOptions o;
    o.engine = engine;
    o.boson_truncation = truncation;
    o.clock = clock;
    o.idle_detuning = idle_detuning;
    o.include_residual_qm = residual_qm;
    o.step.fixed_step = step;
    return o;
}

ProtocolSchedule RunConfig::schedule() const {
    if (n == 2 && equalize && !qubit_duration) return two_magnon_bell_schedule(params);
    if (equalize) return n_magnon_schedule(params, n, true, std::nullopt, swap);
    return n_magnon_schedule(params, n, false, qubit_duration, swap);
}

}  // namespace magnon
