// dynamics.hpp: fixed-step RK4 integration of Schrodinger and Lindblad dynamics.
//
// Both integrators advance on a uniform grid and are bit-for-bit reproducible.
// The Lindblad dissipator is D[X]rho = X rho X^dag - {X^dag X, rho}/2 with the rate
// multiplying it, i.e. (2 X rho X^dag - X^dag X rho - rho X^dag X)/2.

#pragma once

#include "magnon/hamiltonian.hpp"
#include "magnon/hilbert.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace magnon {

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PositivityError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

using HamiltonianFn = std::function<OperatorMatrix(double)>;

// Either a harmonic Hamiltonian (fast sparse path) or an arbitrary callable.
// A callable carries no frequency information, so StepControl::fixed_step or the
// duration-based bound alone decides its step.
using HamiltonianSource = std::variant<HarmonicHamiltonian, OperatorMatrix, HamiltonianFn>;

struct StepControl {
    std::optional<double> fixed_step;  // ns; overrides the automatic choice
    double points_per_radian{50.0};    // h <= 1 / (points_per_radian * max |w|)
    std::size_t min_steps{1000};       // h <= duration / min_steps
    std::size_t max_records{200};      // samples kept per evolve call (plus endpoints)
    double norm_tolerance{1e-8};       // ket: | ||psi||^2 - initial | bound
    double trace_tolerance{1e-6};      // density: | tr rho - initial | bound
    double positivity_floor{-1e-6};    // density: minimum eigenvalue bound
    bool check_positivity{true};       // eigen-decompose at every record sample
    // Integrate only on the basis states reachable from the initial support
    // through the generator's sparsity pattern. Exact; ignored for callables.
    bool reduce_support{true};
};

// Step actually used for a duration given the Hamiltonian's fastest scale.
struct StepPlan {
    std::size_t steps;
    double step;
};
StepPlan plan_steps(double duration, double max_frequency, const StepControl& control);

struct EvolveOptions {
    double start_time{0.0};    // absolute time of the first sample
    double clock_origin{0.0};  // H is evaluated at (t - clock_origin)
    StepControl step{};
    std::optional<QuantumState> target;  // adds a fidelity series when set
};

struct CollapseChannel {
    OperatorMatrix op;
    double rate{};
    std::string label;
};
using CollapseSet = std::vector<CollapseChannel>;

// {m_n, a_n, sigma} with the decay rates from params; zero rates are skipped.
CollapseSet standard_collapse_set(const LayoutPtr& layout, const PhysicalParams& params);

struct SimulationResult {
    std::vector<double> times;
    std::vector<std::vector<double>> populations;  // [sample][basis index]
    std::vector<double> weights;                   // norm^2 or trace per sample
    std::vector<double> fidelity_series;           // empty when no target was given
    double min_eigenvalue{0.0};                    // over density samples; 0 for kets
    std::size_t steps_taken{0};
    std::size_t integrated_dim{0};                 // dimension actually integrated
    double step_size{0.0};                         // largest step used
    QuantumState final_state;

    // Joins a later result, dropping its duplicated first sample.
    void append(const SimulationResult& later);
};

SimulationResult evolve_ket(const QuantumState& state, const HamiltonianSource& hamiltonian,
                            double duration, const EvolveOptions& options = {});

SimulationResult evolve_lindblad(const QuantumState& state, const HamiltonianSource& hamiltonian,
                                 const CollapseSet& collapse, double duration,
                                 const EvolveOptions& options = {});

// <target|rho|target>, clamped to [0, 1].
double fidelity(const QuantumState& rho, const QuantumState& target);

}  // namespace magnon
