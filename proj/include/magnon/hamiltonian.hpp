// hamiltonian.hpp: interaction-picture and dispersive Hamiltonians for the
// magnon / cavity / qubit hybrid system.
//
// Units: angular frequencies in rad/ns, times in ns, hbar = 1.

#pragma once

#include "magnon/hilbert.hpp"

#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace magnon {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// f/2pi in GHz -> rad/ns
constexpr double from_ghz(double ghz) noexcept { return two_pi * ghz; }
// f/2pi in MHz -> rad/ns
constexpr double from_mhz(double mhz) noexcept { return two_pi * mhz * 1e-3; }
constexpr double to_mhz(double rad_per_ns) noexcept { return rad_per_ns / two_pi * 1e3; }

// How a decay rate quoted as "kappa/2pi = x MHz" is turned into a rate in 1/ns.
//   linear:  kappa = x * 1e-3 1/ns  (default)
//   angular: kappa = 2pi * x * 1e-3 1/ns
enum class RateConvention { linear, angular };

constexpr double rate_from_mhz(double mhz, RateConvention conv) noexcept {
    return conv == RateConvention::angular ? from_mhz(mhz) : mhz * 1e-3;
}

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FarDetuningError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// Minimum Delta0 / lambda_q for the dispersive Hamiltonian to be used.
inline constexpr double far_detuning_min_ratio = 5.0;

struct PhysicalParams {
    double omega_q{};
    double omega_a{};
    double lambda_q{};
    std::vector<double> lambda_m;
    std::vector<double> kappa_a;
    std::vector<double> kappa_m;
    double gamma_q{};
    double gyromagnetic_ratio{from_ghz(28.0)};  // rad/ns per tesla

    std::size_t n_magnons() const noexcept { return lambda_m.size(); }

    // Delta0 = omega_q - omega_a
    double qubit_detuning() const noexcept { return omega_q - omega_a; }

    // lambda_q^2 / Delta0; never stored, always derived.
    double effective_coupling() const noexcept {
        return lambda_q * lambda_q / qubit_detuning();
    }

    // Sizes agree and all rates are non-negative.
    void validate() const;

    // Delta0 > 0 and Delta0 / lambda_q >= far_detuning_min_ratio.
    void check_far_detuning() const;

    // Broadcast a single magnon coupling / rate to all N modes.
    PhysicalParams with_magnons(std::size_t n) const;

    // omega_q/2pi = 7.92 GHz, omega_a/2pi = 6.98 GHz, lambda_q/2pi = 83.2 MHz,
    // lambda_m/2pi = 15.3 MHz, kappa_m/2pi = 1.06 MHz, kappa_a/2pi = 1.35 MHz,
    // gamma_q/2pi = 1.2 MHz.
    static PhysicalParams defaults(std::size_t n_magnons,
                                   RateConvention rates = RateConvention::linear);
};

// omega_m = gamma * H
double magnon_frequency_from_field(double bias_field_tesla, const PhysicalParams& params);

struct SegmentConfig {
    // Detuning delta_n = omega_mn - omega_a per magnon; nullopt means the
    // magnon-cavity term is dropped entirely (ideal switch).
    std::vector<std::optional<double>> magnon_detuning;
    bool qubit_cavity_active{false};
    bool include_residual_qm{false};

    static SegmentConfig all_decoupled(std::size_t n_magnons);

    // Qubit coupling on while some magnon is resonant with its cavity.
    bool resonance_warning() const;
};

// A term A e^{i w t} + A^dagger e^{-i w t}.
struct HarmonicTerm {
    Matrix coupling;
    double frequency{};
};

// H(t) = static_part + sum_k (A_k e^{i w_k t} + h.c.)
struct HarmonicHamiltonian {
    LayoutPtr layout;
    Matrix static_part;
    std::vector<HarmonicTerm> terms;
    bool resonance_warning{false};

    OperatorMatrix at(double t) const;
    double max_frequency() const;
    // Upper bound on ||H(t)|| (max row sum of magnitudes, summed over terms).
    double norm_bound() const;
};

// Interaction-picture Hamiltonian with terms switched by the segment config.
HarmonicHamiltonian full_hamiltonian(const LayoutPtr& layout, const PhysicalParams& params,
                                     const SegmentConfig& config);

OperatorMatrix build_full_hamiltonian(const LayoutPtr& layout, const PhysicalParams& params,
                                      const SegmentConfig& config, double t);

// lambda~ [ sigma_z (sum a_n^dag a_n + sum_{l<n} (a_l a_n^dag + h.c.)) + N |e><e| ]
// over the first n_cavities cavities. Throws FarDetuningError if the guard fails.
OperatorMatrix build_effective_hamiltonian(const LayoutPtr& layout, const PhysicalParams& params,
                                           std::size_t n_cavities);

}  // namespace magnon
