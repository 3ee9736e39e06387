// protocol.hpp: timed entanglement protocols, closed-form oracles and targets.
//
// Two protocols:
//   two-magnon Bell:  half swap m1->a1 (pi/4 lambda_m1), cavity exchange via the
//                     qubit (pi/2 lambda~), full swap a2->m2 (pi/2 lambda_m2).
//   N-magnon W-type:  full swap m1->a1 (pi/2 lambda_m1), N-cavity exchange for a
//                     chosen time, full swaps a_n->m_n (pi/2 lambda_mn).

#pragma once

#include "magnon/dynamics.hpp"
#include "magnon/hamiltonian.hpp"
#include "magnon/hilbert.hpp"

#include <optional>
#include <string>
#include <vector>

namespace magnon {

class IsoprobabilityUnattainable : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class ScheduleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ProtocolKind { two_magnon_bell, n_magnon };

// How the final cavity -> magnon swaps of the N-magnon protocol are run.
enum class SwapMode {
    automatic,     // simultaneous when every lambda_m is equal, else sequential
    simultaneous,  // one segment with all magnons resonant
    sequential,    // one segment per cavity, other magnons decoupled
};

struct Segment {
    SegmentConfig config;
    double duration{};  // ns
    std::string description;
};

struct ProtocolSchedule {
    ProtocolKind kind{ProtocolKind::n_magnon};
    std::size_t n_magnons{};
    PhysicalParams params;
    std::vector<Segment> segments;

    double total_duration() const;
    // Duration of the (single) qubit-coupled segment.
    double qubit_segment_duration() const;
    // Positive durations, consistent sizes, exactly one qubit segment.
    void validate() const;
};

ProtocolSchedule two_magnon_bell_schedule(const PhysicalParams& params);

// When equalize is set the exchange time comes from isoprobability_time and
// qubit_duration must be empty; otherwise qubit_duration is required.
ProtocolSchedule n_magnon_schedule(const PhysicalParams& params, std::size_t n, bool equalize,
                                   std::optional<double> qubit_duration = std::nullopt,
                                   SwapMode swap = SwapMode::automatic);

// C_1 = (e^{i n l t} + n - 1)/n, C_k = (e^{i n l t} - 1)/n for k >= 2.
std::vector<cplx> analytic_coefficients(std::size_t n, double lambda_eff, double t);

// Smallest t > 0 with |C_1|^2 = |C_2|^2, i.e. cos(n l t) = (2 - n)/2; none for n >= 5.
std::optional<double> isoprobability_time(std::size_t n, double lambda_eff);

struct TargetState {
    LayoutPtr layout;
    // Amplitudes on |1_m1>, |1_m2>, ..., all cavities empty, qubit in g.
    std::vector<cplx> coefficients;

    QuantumState ket() const;
};

// N-magnon target: -C_k(qubit_segment_duration) on the single-excitation magnon states.
TargetState n_magnon_target(const LayoutPtr& layout, std::size_t n, double lambda_eff,
                            double qubit_segment_duration);
// (|10> + |01>)/sqrt(2) on the magnons.
TargetState bell_target(const LayoutPtr& layout);
// Target matching the schedule's protocol kind.
TargetState target_state(const LayoutPtr& layout, const ProtocolSchedule& schedule);

// |1_m1>, everything else in vacuum / g.
QuantumState initial_state(const LayoutPtr& layout);

enum class Engine { ideal_effective, full_unitary, lindblad };

enum class PhaseClock {
    global,         // interaction-picture phases run on one clock across segments
    segment_reset,  // each segment restarts its phase clock at zero
};

struct ExecuteOptions {
    Engine engine{Engine::lindblad};
    std::size_t boson_truncation{2};
    PhaseClock clock{PhaseClock::global};
    // When set, decoupled magnons get this numeric detuning instead of being switched off.
    std::optional<double> idle_detuning;
    bool include_residual_qm{false};
    StepControl step{};
};

// Detuning used by the realism mode: 2pi x 1 GHz.
inline constexpr double default_idle_detuning = two_pi * 1.0;

struct ProtocolRun {
    SimulationResult result;
    TargetState target;
    double fidelity{};                  // <target| rho |target> with the target phases as given
    double phase_insensitive_fidelity{};  // maximised over relative target phases
    double final_qubit_excited{};
    double max_qubit_excited{};
};

ProtocolRun execute(const ProtocolSchedule& schedule, const ExecuteOptions& options = {});

// max over relative phases of the target components:
// sum_jk |t_j| |t_k| |rho_jk|  (exact for pure states).
double phase_insensitive_fidelity(const QuantumState& state, const QuantumState& target);

// Probability of the qubit being excited, from a population vector.
double qubit_excited_population(const SystemLayout& layout, const std::vector<double>& populations);

// Line-oriented audit form: a header line then one "segment" line per segment.
std::string schedule_to_text(const ProtocolSchedule& schedule);
// Inverse of schedule_to_text; params supplies everything the text does not carry.
ProtocolSchedule schedule_from_text(const std::string& text, const PhysicalParams& params);

std::string to_string(Engine engine);
Engine engine_from_string(const std::string& name);

}  // namespace magnon
