// sweeps.hpp: fidelity sweeps over one physical parameter and closed-form
// probability traces, with CSV output.

#pragma once

#include "magnon/protocol.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace magnon {

enum class SweepParameter { lambda_q, kappa_a, kappa_m, gamma_q };

std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& name);

// Current value of the parameter in internal units (rad/ns or 1/ns).
double parameter_value(const PhysicalParams& params, SweepParameter p);
PhysicalParams with_parameter(const PhysicalParams& params, SweepParameter p, double value);

struct SweepSpec {
    SweepParameter parameter{SweepParameter::lambda_q};
    double from{};  // internal units
    double to{};
    std::size_t points{2};
    PhysicalParams base;
    std::size_t n{2};
    bool equalize{true};  // ignored for n = 2, which runs the Bell protocol
    ExecuteOptions execution{};
    // Recompute protocol durations at each grid point (default) or keep the base ones.
    bool recompute_durations{true};
    unsigned threads{1};

    void validate() const;
    std::vector<double> grid() const;
};

// +-50% around the base value.
std::pair<double, double> default_range(const PhysicalParams& base, SweepParameter p);

struct SkippedPoint {
    std::size_t index;
    double value;
    std::string reason;
};

struct SweepResult {
    std::vector<double> values;      // evaluated grid points, in grid order
    std::vector<double> fidelities;  // same length as values
    std::vector<SkippedPoint> skipped;
    std::vector<std::pair<std::string, std::string>> metadata;
};

// Protocol used for a given protocol selector: Bell protocol for n = 2, N-magnon otherwise.
ProtocolSchedule protocol_for(const PhysicalParams& params, std::size_t n, bool equalize);

SweepResult run_sweep(const SweepSpec& spec);

struct ProbabilityTrace {
    std::size_t n{};
    std::vector<double> times;
    // columns[0] = P1, columns[k] = P_{k+1}; all k >= 1 are identical.
    std::vector<std::vector<double>> columns;
};

ProbabilityTrace probability_trace(std::size_t n, double lambda_eff, double t_max, std::size_t samples);

// CSV helpers: 12 significant digits, header row first.
std::string format_csv_number(double v);
void write_sweep_csv(std::ostream& out, const SweepResult& result, SweepParameter p);
void write_trace_csv(std::ostream& out, const ProbabilityTrace& trace);

}  // namespace magnon
