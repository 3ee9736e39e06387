#include "magnon/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace magnon {

void PhysicalParams::validate() const {
    const std::size_t n = lambda_m.size();
    if (n == 0) throw ParameterError("at least one magnon coupling is required");
    if (kappa_a.size() != n || kappa_m.size() != n) {
        throw ParameterError("per-mode rate vectors must match the number of magnons");
    }
    auto non_negative = [](double v) { return v >= 0.0 && std::isfinite(v); };
    if (!std::all_of(kappa_a.begin(), kappa_a.end(), non_negative) ||
        !std::all_of(kappa_m.begin(), kappa_m.end(), non_negative) || !non_negative(gamma_q)) {
        throw ParameterError("decay rates must be non-negative");
    }
    if (!std::isfinite(omega_q) || !std::isfinite(omega_a) || !std::isfinite(lambda_q)) {
        throw ParameterError("frequencies must be finite");
    }
}

void PhysicalParams::check_far_detuning() const {
    const double delta0 = qubit_detuning();
    if (!(delta0 > 0.0)) {
        throw FarDetuningError("far-detuning guard: omega_q - omega_a must be positive");
    }
    const double ratio = delta0 / std::abs(lambda_q);
    if (!(ratio >= far_detuning_min_ratio)) {
        std::ostringstream os;
        os << "far-detuning guard: Delta0/lambda_q = " << ratio << " < " << far_detuning_min_ratio;
        throw FarDetuningError(os.str());
    }
}

PhysicalParams PhysicalParams::with_magnons(std::size_t n) const {
    PhysicalParams p = *this;
    auto resize = [n](std::vector<double>& v) {
        const double fill = v.empty() ? 0.0 : v.back();
        v.resize(n, fill);
    };
    resize(p.lambda_m);
    resize(p.kappa_a);
    resize(p.kappa_m);
    return p;
}

PhysicalParams PhysicalParams::defaults(std::size_t n_magnons, RateConvention rates) {
    PhysicalParams p;
    p.omega_q = from_ghz(7.92);
    p.omega_a = from_ghz(6.98);
    p.lambda_q = from_mhz(83.2);
    p.lambda_m.assign(n_magnons, from_mhz(15.3));
    p.kappa_m.assign(n_magnons, rate_from_mhz(1.06, rates));
    p.kappa_a.assign(n_magnons, rate_from_mhz(1.35, rates));
    p.gamma_q = rate_from_mhz(1.2, rates);
    return p;
}

double magnon_frequency_from_field(double bias_field_tesla, const PhysicalParams& params) {
    if (bias_field_tesla < 0.0) {
        throw ParameterError("bias field must be non-negative");
    }
    return params.gyromagnetic_ratio * bias_field_tesla;
}

SegmentConfig SegmentConfig::all_decoupled(std::size_t n_magnons) {
    SegmentConfig c;
    c.magnon_detuning.assign(n_magnons, std::nullopt);
    return c;
}

bool SegmentConfig::resonance_warning() const {
    return qubit_cavity_active &&
           std::any_of(magnon_detuning.begin(), magnon_detuning.end(),
                       [](const std::optional<double>& d) { return d && *d == 0.0; });
}

OperatorMatrix HarmonicHamiltonian::at(double t) const {
    Matrix h = static_part;
    for (const auto& term : terms) {
        const cplx phase = std::polar(1.0, term.frequency * t);
        h += phase * term.coupling;
        h += std::conj(phase) * term.coupling.adjoint();
    }
    return {layout, std::move(h)};
}

double HarmonicHamiltonian::max_frequency() const {
    double w = 0.0;
    for (const auto& term : terms) w = std::max(w, std::abs(term.frequency));
    return w;
}

double HarmonicHamiltonian::norm_bound() const {
    auto row_bound = [](const Matrix& m) {
        return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
    };
    double b = row_bound(static_part);
    for (const auto& term : terms) {
        b += row_bound(term.coupling) + row_bound(term.coupling.adjoint());
    }
    return b;
}

namespace {

void require_matching(const LayoutPtr& layout, const PhysicalParams& params,
                      const SegmentConfig& config) {
    const std::size_t n = params.n_magnons();
    if (layout->n_magnons() != n) {
        throw ParameterError("layout and parameters disagree on the number of magnons");
    }
    if (config.magnon_detuning.size() != n) {
        throw ParameterError("segment config and parameters disagree on the number of magnons");
    }
}

}  // namespace

HarmonicHamiltonian full_hamiltonian(const LayoutPtr& layout, const PhysicalParams& params,
                                     const SegmentConfig& config) {
    require_matching(layout, params, config);
    const std::size_t n = params.n_magnons();
    const auto dim = static_cast<Eigen::Index>(layout->total_dim());

    HarmonicHamiltonian h{layout, Matrix::Zero(dim, dim), {}, config.resonance_warning()};

    const auto q = qubit_ops(layout);
    for (std::size_t k = 1; k <= n; ++k) {
        const auto& detuning = config.magnon_detuning[k - 1];
        const auto a = annihilation(layout, cavity_label(k));
        const auto m = annihilation(layout, magnon_label(k));
        if (detuning) {
            h.terms.push_back({params.lambda_m[k - 1] * sparse_product(a.entries, m.entries.adjoint()), *detuning});
        }
        if (config.qubit_cavity_active) {
            h.terms.push_back({params.lambda_q * sparse_product(a.entries, q.raise.entries),
                               params.qubit_detuning()});
        }
        if (config.include_residual_qm) {
            // Resonant residual coupling lambda_q lambda_m / Delta0 (sigma+ m + h.c.).
            const double g = params.lambda_q * params.lambda_m[k - 1] / params.qubit_detuning();
            const Matrix term = g * sparse_product(q.raise.entries, m.entries);
            h.static_part += term + term.adjoint();
        }
    }

    // Merge terms sharing a frequency so the integrator applies fewer products.
    std::vector<HarmonicTerm> merged;
    for (auto& term : h.terms) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const HarmonicTerm& t) { return t.frequency == term.frequency; });
        if (it == merged.end()) {
            merged.push_back(std::move(term));
        } else {
            it->coupling += term.coupling;
        }
    }
    h.terms = std::move(merged);
    return h;
}

OperatorMatrix build_full_hamiltonian(const LayoutPtr& layout, const PhysicalParams& params,
                                      const SegmentConfig& config, double t) {
    return full_hamiltonian(layout, params, config).at(t);
}

OperatorMatrix build_effective_hamiltonian(const LayoutPtr& layout, const PhysicalParams& params,
                                           std::size_t n_cavities) {
    params.check_far_detuning();
    if (n_cavities == 0 || n_cavities > layout->n_magnons()) {
        throw ParameterError("n_cavities must be between 1 and the number of cavities in the layout");
    }
    const double lt = params.effective_coupling();
    const auto q = qubit_ops(layout);

    std::vector<OperatorMatrix> a;
    a.reserve(n_cavities);
    for (std::size_t k = 1; k <= n_cavities; ++k) a.push_back(annihilation(layout, cavity_label(k)));

    Matrix photon = Matrix::Zero(q.sigma_z.entries.rows(), q.sigma_z.entries.cols());
    for (std::size_t l = 0; l < n_cavities; ++l) {
        photon += sparse_product(a[l].entries.adjoint(), a[l].entries);
        for (std::size_t k = l + 1; k < n_cavities; ++k) {
            const Matrix hop = sparse_product(a[l].entries, a[k].entries.adjoint());
            photon += hop + hop.adjoint();
        }
    }
    Matrix h = sparse_product(q.sigma_z.entries, photon) + static_cast<double>(n_cavities) * q.excited.entries;
    return {layout, lt * h};
}

}  // namespace magnon
